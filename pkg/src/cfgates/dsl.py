"""Line-oriented pipeline description files (``.cfg``).

::

    # GHZ preparation
    gate x1 kind=xor M=50 N=5000
    gate x2 kind=xor M=50 N=5000
    prep bob superpose 0.7071067811865475 0.7071067811865475
    stage x1(bob,charlie) postselect output0
    stage x2(charlie,david) measure output0
    target ghz

Statements: ``gate``, ``prep``, ``stage`` and ``target``; ``#`` starts a
comment. ``measure`` ends the pipeline; its optional port is the success
detector (output0 by default). Parties without a ``prep`` line start in
(|e> + |g>)/sqrt 2.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

from .entangle import TARGETS, AtomState, Pipeline, PipelineResult, Stage, run_pipeline
from .errors import CfgatesError
from .gates import GateConfig, GateKind

KINDS = {"nand": GateKind.NAND2, "nand3": GateKind.NAND_MULTI, "nor": GateKind.NOR, "xor": GateKind.XOR}
ARITY = {"nand": 2, "nand3": 3, "nor": 2, "xor": 2}
PORT_NAMES = ("output0", "output1")
NORM_TOL = 1e-9

_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")
_TOKEN = re.compile(r"(?P<word>[A-Za-z0-9_.+\-]+)|(?P<punct>[(),=])|(?P<space>\s+)")


class ParseError(CfgatesError, ValueError):
    def __init__(self, line: int, column: int, reason: str):
        self.line = line
        self.column = column
        self.reason = reason
        super().__init__(f"line {line}, column {column}: {reason}")


@dataclass(frozen=True)
class GateDecl:
    name: str
    kind: str
    M: int
    N: int
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Prep:
    """``mode`` is g, e, superpose or bit; ``values`` holds its numbers."""

    party: str
    mode: str
    values: tuple = ()
    line: int = field(default=0, compare=False)

    def amplitudes(self) -> tuple[float, float]:
        if self.mode == "g":
            return 1.0, 0.0
        if self.mode == "e":
            return 0.0, 1.0
        if self.mode == "bit":
            return (0.0, 1.0) if self.values[0] else (1.0, 0.0)
        return self.values


@dataclass(frozen=True)
class StageDecl:
    gate: str
    parties: tuple[str, ...]
    postselect: int | None
    measure_port: int = 0
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class CircuitProgram:
    gates: tuple[GateDecl, ...]
    preps: tuple[Prep, ...]
    stages: tuple[StageDecl, ...]
    target: str | None = None

    def gate(self, name: str) -> GateDecl:
        for g in self.gates:
            if g.name == name:
                return g
        raise KeyError(name)


# -- lexing -------------------------------------------------------------------------


@dataclass(frozen=True)
class _Tok:
    text: str
    col: int  # 1-based


def _tokenize(line: str, lineno: int) -> list[_Tok]:
    code = line.split("#", 1)[0]
    toks = []
    pos = 0
    while pos < len(code):
        m = _TOKEN.match(code, pos)
        if m is None:
            raise ParseError(lineno, pos + 1, f"unexpected character {code[pos]!r}")
        if m.lastgroup != "space":
            toks.append(_Tok(m.group(), pos + 1))
        pos = m.end()
    return toks


class _Cursor:
    def __init__(self, toks: list[_Tok], lineno: int, line: str):
        self.toks = toks
        self.i = 0
        self.lineno = lineno
        self.end_col = len(line.split("#", 1)[0].rstrip()) + 1

    def error(self, reason: str, tok: _Tok | None = None) -> ParseError:
        col = tok.col if tok is not None else self.end_col
        return ParseError(self.lineno, col, reason)

    def peek(self) -> _Tok | None:
        return self.toks[self.i] if self.i < len(self.toks) else None

    def next(self, what: str) -> _Tok:
        tok = self.peek()
        if tok is None:
            raise self.error(f"expected {what}")
        self.i += 1
        return tok

    def expect(self, text: str) -> _Tok:
        tok = self.next(repr(text))
        if tok.text != text:
            raise self.error(f"expected {text!r}, got {tok.text!r}", tok)
        return tok

    def ident(self, what: str) -> _Tok:
        tok = self.next(what)
        if not _IDENT.match(tok.text):
            raise self.error(f"invalid {what} {tok.text!r}", tok)
        return tok

    def done(self) -> None:
        tok = self.peek()
        if tok is not None:
            raise self.error(f"unexpected {tok.text!r}", tok)


# -- statements ----------------------------------------------------------------------


def _parse_int(cur: _Cursor, tok: _Tok, key: str) -> int:
    try:
        value = int(tok.text)
    except ValueError:
        raise cur.error(f"{key} must be an integer, got {tok.text!r}", tok) from None
    if value < 2:
        raise cur.error(f"{key} must be at least 2, got {value}", tok)
    return value


def _parse_float(cur: _Cursor, tok: _Tok) -> float:
    try:
        value = float(tok.text)
    except ValueError:
        raise cur.error(f"invalid amplitude {tok.text!r}", tok) from None
    if not math.isfinite(value):
        raise cur.error(f"invalid amplitude {tok.text!r}", tok)
    return value


def _gate(cur: _Cursor) -> GateDecl:
    name = cur.ident("gate name")
    fields: dict[str, tuple[str, _Tok]] = {}
    while cur.peek() is not None:
        key = cur.ident("gate field")
        if key.text not in ("kind", "M", "N"):
            raise cur.error(f"unknown gate field {key.text!r}", key)
        if key.text in fields:
            raise cur.error(f"duplicate gate field {key.text!r}", key)
        cur.expect("=")
        value = cur.next(f"value for {key.text}")
        fields[key.text] = (value.text, value)
    for key in ("kind", "M", "N"):
        if key not in fields:
            raise cur.error(f"gate {name.text!r} is missing {key}=")
    kind, kind_tok = fields["kind"]
    if kind not in KINDS:
        raise cur.error(f"unknown gate kind {kind!r}; expected one of {', '.join(KINDS)}", kind_tok)
    M = _parse_int(cur, fields["M"][1], "M")
    N = _parse_int(cur, fields["N"][1], "N")
    return GateDecl(name.text, kind, M, N, cur.lineno)


def _prep(cur: _Cursor) -> Prep:
    party = cur.ident("party name")
    mode = cur.next("preparation (g, e, superpose or bit)")
    if mode.text in ("g", "e"):
        cur.done()
        return Prep(party.text, mode.text, (), cur.lineno)
    if mode.text == "bit":
        tok = cur.next("bit value")
        if tok.text not in ("0", "1"):
            raise cur.error(f"bit must be 0 or 1, got {tok.text!r}", tok)
        cur.done()
        return Prep(party.text, "bit", (int(tok.text),), cur.lineno)
    if mode.text == "superpose":
        a_tok = cur.next("amplitude of g")
        a_g = _parse_float(cur, a_tok)
        a_e = _parse_float(cur, cur.next("amplitude of e"))
        cur.done()
        norm = a_g * a_g + a_e * a_e
        if abs(norm - 1) > NORM_TOL:
            raise cur.error(f"amplitudes are not normalized (|a_g|^2 + |a_e|^2 = {norm:.12g})", a_tok)
        return Prep(party.text, "superpose", (a_g, a_e), cur.lineno)
    raise cur.error(f"unknown preparation {mode.text!r}", mode)


def _port(cur: _Cursor, tok: _Tok) -> int:
    if tok.text not in PORT_NAMES:
        raise cur.error(f"unknown port {tok.text!r}; expected output0 or output1", tok)
    return PORT_NAMES.index(tok.text)


def _stage(cur: _Cursor) -> StageDecl:
    name = cur.ident("gate name")
    cur.expect("(")
    parties = [cur.ident("party name").text]
    while True:
        tok = cur.next("',' or ')'")
        if tok.text == ")":
            break
        if tok.text != ",":
            raise cur.error(f"expected ',' or ')', got {tok.text!r}", tok)
        parties.append(cur.ident("party name").text)
    action = cur.next("postselect or measure")
    if action.text == "postselect":
        port = _port(cur, cur.next("port"))
        cur.done()
        return StageDecl(name.text, tuple(parties), port, 0, cur.lineno)
    if action.text == "measure":
        tok = cur.peek()
        port = 0
        if tok is not None:
            cur.i += 1
            port = _port(cur, tok)
        cur.done()
        return StageDecl(name.text, tuple(parties), None, port, cur.lineno)
    raise cur.error(f"expected postselect or measure, got {action.text!r}", action)


# -- program -------------------------------------------------------------------------


def parse_program(text: str) -> CircuitProgram:
    gates: list[GateDecl] = []
    preps: list[Prep] = []
    stages: list[StageDecl] = []
    target: str | None = None
    target_line = 0
    columns: dict[int, dict[str, int]] = {}

    for lineno, line in enumerate(text.splitlines(), start=1):
        toks = _tokenize(line, lineno)
        if not toks:
            continue
        cur = _Cursor(toks, lineno, line)
        head = cur.next("statement")
        if head.text == "gate":
            decl = _gate(cur)
            if any(g.name == decl.name for g in gates):
                raise ParseError(lineno, toks[1].col, f"gate {decl.name!r} declared twice")
            gates.append(decl)
        elif head.text == "prep":
            prep = _prep(cur)
            if any(p.party == prep.party for p in preps):
                raise ParseError(lineno, toks[1].col, f"{prep.party!r} prepared twice")
            preps.append(prep)
        elif head.text == "stage":
            stage = _stage(cur)
            columns[lineno] = {"name": toks[1].col, "open": toks[2].col}
            stages.append(stage)
        elif head.text == "target":
            tok = cur.next("target state")
            if tok.text not in TARGETS:
                raise cur.error(f"unknown target {tok.text!r}; expected one of {', '.join(TARGETS)}", tok)
            cur.done()
            if target is not None:
                raise ParseError(lineno, head.col, f"target already given on line {target_line}")
            target, target_line = tok.text, lineno
        else:
            raise ParseError(lineno, head.col, f"unknown keyword {head.text!r}")

    if not stages:
        raise ParseError(1, 1, "no pipeline: the program has no stage statements")
    declared = {g.name: g for g in gates}
    for i, stage in enumerate(stages):
        cols = columns[stage.line]
        decl = declared.get(stage.gate)
        if decl is None:
            raise ParseError(stage.line, cols["name"], f"undeclared gate {stage.gate!r}")
        if len(stage.parties) != ARITY[decl.kind]:
            raise ParseError(
                stage.line,
                cols["open"],
                f"{decl.kind} gate {decl.name!r} takes {ARITY[decl.kind]} parties, got {len(stage.parties)}",
            )
        if len(set(stage.parties)) != len(stage.parties):
            raise ParseError(stage.line, cols["open"], "a party controls the same gate twice")
        if stage.postselect is None and i != len(stages) - 1:
            raise ParseError(stage.line, cols["name"], "measure must be the last stage")
    return CircuitProgram(tuple(gates), tuple(preps), tuple(stages), target)


def _num(x: float) -> str:
    return repr(float(x))


def render_program(program: CircuitProgram) -> str:
    lines = []
    for g in program.gates:
        lines.append(f"gate {g.name} kind={g.kind} M={g.M} N={g.N}")
    for p in program.preps:
        if p.mode in ("g", "e"):
            lines.append(f"prep {p.party} {p.mode}")
        elif p.mode == "bit":
            lines.append(f"prep {p.party} bit {p.values[0]}")
        else:
            lines.append(f"prep {p.party} superpose {_num(p.values[0])} {_num(p.values[1])}")
    for s in program.stages:
        head = f"stage {s.gate}({','.join(s.parties)})"
        if s.postselect is None:
            lines.append(f"{head} measure {PORT_NAMES[s.measure_port]}")
        else:
            lines.append(f"{head} postselect {PORT_NAMES[s.postselect]}")
    if program.target is not None:
        lines.append(f"target {program.target}")
    return "\n".join(lines) + "\n"


def to_pipeline(program: CircuitProgram) -> Pipeline:
    stages = []
    success = 0
    for s in program.stages:
        decl = program.gate(s.gate)
        cfg = GateConfig(KINDS[decl.kind], decl.M, decl.N, s.parties)
        stages.append(Stage(cfg, keep=s.postselect))
        if s.postselect is None:
            success = s.measure_port
    return Pipeline(tuple(stages), success_port=success, target=program.target)


def preparation(program: CircuitProgram) -> AtomState:
    h = 1 / math.sqrt(2)
    amps: dict[str, tuple[float, float]] = {}
    for stage in program.stages:
        for party in stage.parties:
            amps.setdefault(party, (h, h))
    for p in program.preps:
        amps[p.party] = p.amplitudes()
    return AtomState(amps)


def execute_program(program: CircuitProgram, *, ideal: bool = False) -> PipelineResult:
    return run_pipeline(to_pipeline(program), preparation(program), ideal=ideal)


def load_program(path) -> CircuitProgram:
    with open(path, encoding="utf-8") as fh:
        return parse_program(fh.read())


def shipped_program(name: str) -> str:
    """Text of a program bundled with the package (``ghz`` or ``w``)."""
    from importlib.resources import files

    return (files("cfgates") / "programs" / f"{name}.cfg").read_text(encoding="utf-8")
