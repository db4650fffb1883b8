"""Scalar transfer model of the gates, used as an oracle by the tests.

Every inner structure is collapsed to the single amplitude factor its working
mode predicts, and only the outer rotations are iterated. Nothing here touches
the netlist code.
"""

import math


def chain(n, K, arm_factor, a_left=1.0):
    """n splitters BS(K) on a rail whose right arm multiplies by ``arm_factor``.

    Returns (left amplitude, right output of the last splitter).
    """
    t = math.pi / (2 * K)
    c, s = math.cos(t), math.sin(t)
    a_l, a_r = a_left, 0.0
    for k in range(1, n + 1):
        a_l, a_r = a_l * c - a_r * s, a_l * s + a_r * c
        if k < n:
            a_r *= arm_factor
    return a_l, a_r


def cosp(k, K):
    return math.cos(math.pi / (2 * K)) ** k


def nand(M, N, bits):
    blocked = not all(bits)
    inner = cosp(N, N) if blocked else chain(N, N, 1.0)[0]
    return chain(M, M, inner)


def cgu_2n(N, blocked):
    return cosp(2 * N, N) if blocked else -cosp(2 * N, N)


def nor_middle_factor(N, bits):
    b, c = (bit == 0 for bit in bits)
    product = cgu_2n(N, b) * cgu_2n(N, c) * cgu_2n(N, b or c)
    att2 = cosp(6 * N, N)
    return (att2 + product) / 2


def nor(M, N, bits):
    return chain(M, M, nor_middle_factor(N, bits))


def xor(M, N, bits):
    halves = []
    for bit in bits:
        cgu = cosp(N, N) if bit == 0 else chain(N, N, 1.0)[0]
        halves.append(chain(2 * M, M, cgu)[0])
    middle = -halves[0] * halves[1]
    return (1 - middle) / 2, (1 + middle) / 2


def gate(kind, M, N, bits):
    return {"nand": nand, "nand_multi": nand, "nor": nor, "xor": xor}[kind](M, N, bits)
