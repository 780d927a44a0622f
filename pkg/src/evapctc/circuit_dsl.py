"""Line-oriented text format for chronology-violating circuits (``.ctc``).

::

    circuit <name>
    input <wire>...
    ctc <wire>...
    table <GATE> 00-><c><f> 01-><c><f> 10-><c><f> 11-><c><f>
    gate <GATE> fwd=<wire> ctc=<wire> out=<wire>
    fork <in> -> <out1> <out2>
    and <in1> <in2> -> <out>
    not <in> -> <out>
    const <0|1> -> <out>
    output <wire>...

``#`` starts a comment. Table keys are ``<fwd><ctc>``; values are
``<ctc_out><forward_out>``. ``XORG`` and ``LIAR`` are predefined.

``input``, ``ctc``, ``output`` and ``table`` lines may appear anywhere and
may repeat. Node lines (``gate``, ``fork``, ``and``, ``not``, ``const``) are
evaluated in file order, so each must only read wires defined above it.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from importlib import resources

from .ctc import BUILTIN_GATES, And, Circuit, CircuitError, Const, CtcGate, Fork, GateNode, Not
from .errors import ParseError, SourceSpan, ValidationError

_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")
_TABLE_ROW = re.compile(r"([01])([01])->([01])([01])\Z")

BUNDLED = ("fig2.ctc", "fig2_bare_h.ctc", "liar.ctc", "identity.ctc")


@dataclass(frozen=True)
class ParsedCircuit:
    name: str
    circuit: Circuit


@dataclass(frozen=True)
class _Tok:
    text: str
    span: SourceSpan


def _tokenize(text: str) -> list[list[_Tok]]:
    lines = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0]
        toks = [
            _Tok(m.group(), SourceSpan(lineno, m.start() + 1)) for m in re.finditer(r"\S+", body)
        ]
        if toks:
            lines.append(toks)
    return lines


def _ident(tok: _Tok, what: str = "wire name") -> str:
    if not _IDENT.match(tok.text):
        raise ParseError(f"invalid {what} '{tok.text}'", tok.span)
    return tok.text


def _expect(tok: _Tok, text: str) -> None:
    if tok.text != text:
        raise ParseError(f"expected '{text}', got '{tok.text}'", tok.span)


def _arity(toks: list[_Tok], n: int, usage: str) -> None:
    if len(toks) != n:
        span = toks[n].span if len(toks) > n else toks[0].span
        raise ParseError(f"malformed '{toks[0].text}' line, expected: {usage}", span)


def _slot(tok: _Tok, key: str) -> str:
    prefix = key + "="
    if not tok.text.startswith(prefix):
        raise ParseError(f"expected '{prefix}<wire>', got '{tok.text}'", tok.span)
    return _ident(_Tok(tok.text[len(prefix):], SourceSpan(tok.span.line, tok.span.column + len(prefix))))


def parse(text: str | bytes) -> ParsedCircuit:
    """Parse ``.ctc`` source into a validated circuit.

    Every rejection is a :class:`ParseError` carrying a :class:`SourceSpan`.
    """
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ParseError(f"input is not valid UTF-8: {exc.reason}", SourceSpan(1, 1)) from None

    name = None
    inputs: list[_Tok] = []
    ctcs: list[_Tok] = []
    outputs: list[_Tok] = []
    tables: dict[str, CtcGate] = {}
    node_lines: list[list[_Tok]] = []
    last_span = SourceSpan(1, 1)

    for toks in _tokenize(text):
        head = toks[0]
        last_span = head.span
        kw = head.text
        if kw == "circuit":
            _arity(toks, 2, "circuit <name>")
            if name is not None:
                raise ParseError("duplicate 'circuit' header", head.span)
            name = _ident(toks[1], "circuit name")
        elif kw == "input":
            inputs.extend(toks[1:])
        elif kw == "ctc":
            ctcs.extend(toks[1:])
        elif kw == "output":
            outputs.extend(toks[1:])
        elif kw == "table":
            _arity(toks, 6, "table <GATE> 00->cf 01->cf 10->cf 11->cf")
            gname = _ident(toks[1], "gate name")
            if gname in BUILTIN_GATES or gname in tables:
                raise ParseError(f"gate '{gname}' is already defined", toks[1].span)
            rows = {}
            for tok in toks[2:]:
                m = _TABLE_ROW.match(tok.text)
                if not m:
                    raise ParseError(f"malformed table row '{tok.text}', expected e.g. 01->10", tok.span)
                key = (int(m.group(1)), int(m.group(2)))
                if key in rows:
                    raise ParseError(f"table row {tok.text[:2]} given twice", tok.span)
                rows[key] = (int(m.group(3)), int(m.group(4)))
            tables[gname] = CtcGate.from_mapping(gname, rows)
        elif kw in ("gate", "fork", "and", "not", "const"):
            node_lines.append(toks)
        else:
            raise ParseError(f"unknown statement '{kw}'", head.span)

    if name is None:
        raise ParseError("missing 'circuit <name>' header", SourceSpan(1, 1))
    if not outputs:
        raise ParseError("missing 'output' declaration", last_span)

    ctc_spans: dict[str, SourceSpan] = {}
    for tok in ctcs:
        w = _ident(tok)
        if w in ctc_spans:
            raise ParseError(f"CTC wire '{w}' declared twice", tok.span)
        ctc_spans[w] = tok.span

    def plain(tok: _Tok) -> str:
        w = _ident(tok)
        if w in ctc_spans:
            raise ParseError(f"CTC wire '{w}' used as a plain wire", tok.span)
        return w

    defined: dict[str, SourceSpan] = {}

    def define(tok: _Tok) -> str:
        w = plain(tok)
        if w in defined:
            raise ParseError(f"wire '{w}' redefined (first defined at {defined[w]})", tok.span)
        defined[w] = tok.span
        return w

    def read(tok: _Tok) -> str:
        w = plain(tok)
        if w not in defined:
            raise ParseError(f"wire '{w}' is used before it is defined", tok.span)
        return w

    input_names = [define(tok) for tok in inputs]

    nodes = []
    ctc_used: dict[str, SourceSpan] = {}
    for toks in node_lines:
        kw = toks[0].text
        if kw == "gate":
            _arity(toks, 5, "gate <GATE> fwd=<wire> ctc=<wire> out=<wire>")
            gname = toks[1].text
            gate = BUILTIN_GATES.get(gname) or tables.get(gname)
            if gate is None:
                raise ParseError(f"unknown gate '{gname}'", toks[1].span)
            fwd_tok, ctc_tok, out_tok = toks[2], toks[3], toks[4]
            fwd = read(_Tok(_slot(fwd_tok, "fwd"), _shift(fwd_tok.span, 4)))
            cw = _slot(ctc_tok, "ctc")
            cspan = _shift(ctc_tok.span, 4)
            if cw not in ctc_spans:
                raise ParseError(f"'{cw}' is not a declared CTC wire", cspan)
            if cw in ctc_used:
                raise ParseError(f"CTC wire '{cw}' is already attached at {ctc_used[cw]}", cspan)
            ctc_used[cw] = cspan
            out = define(_Tok(_slot(out_tok, "out"), _shift(out_tok.span, 4)))
            nodes.append(GateNode(gate, fwd, cw, out))
        elif kw == "fork":
            _arity(toks, 5, "fork <in> -> <out1> <out2>")
            _expect(toks[2], "->")
            src = read(toks[1])
            nodes.append(Fork(src, (define(toks[3]), define(toks[4]))))
        elif kw == "and":
            _arity(toks, 5, "and <in1> <in2> -> <out>")
            _expect(toks[3], "->")
            a, b = read(toks[1]), read(toks[2])
            nodes.append(And(a, b, define(toks[4])))
        elif kw == "not":
            _arity(toks, 4, "not <in> -> <out>")
            _expect(toks[2], "->")
            src = read(toks[1])
            nodes.append(Not(src, define(toks[3])))
        else:
            _arity(toks, 4, "const <0|1> -> <out>")
            if toks[1].text not in ("0", "1"):
                raise ParseError(f"constant must be 0 or 1, got '{toks[1].text}'", toks[1].span)
            _expect(toks[2], "->")
            nodes.append(Const(int(toks[1].text), define(toks[3])))

    for w, span in ctc_spans.items():
        if w not in ctc_used:
            raise ParseError(f"CTC wire '{w}' is not connected to any gate", span)
    output_names = [read(tok) for tok in outputs]

    circuit = Circuit(tuple(input_names), tuple(ctc_spans), tuple(nodes), tuple(output_names))
    try:
        circuit.validate()
    except CircuitError as exc:
        span = ctc_spans.get(exc.wire) or defined.get(exc.wire) or SourceSpan(1, 1)
        raise ParseError(str(exc), span) from None
    return ParsedCircuit(name, circuit)


def _shift(span: SourceSpan, by: int) -> SourceSpan:
    return SourceSpan(span.line, span.column + by)


def _table_row(gate: CtcGate) -> str:
    cells = [f"{f}{c}->{co}{fo}" for (f, c), (co, fo) in sorted(gate.truth_table.items())]
    return f"table {gate.name} " + " ".join(cells)


def render(pc: ParsedCircuit) -> str:
    """Canonical source text; ``parse(render(pc)) == pc``."""
    c = pc.circuit
    lines = [f"circuit {pc.name}"]
    custom = {}
    for node in c.nodes:
        if isinstance(node, GateNode) and node.gate.name not in BUILTIN_GATES:
            custom[node.gate.name] = node.gate
    lines += [_table_row(custom[k]) for k in sorted(custom)]
    if c.inputs:
        lines.append("input " + " ".join(c.inputs))
    if c.ctc_wires:
        lines.append("ctc " + " ".join(c.ctc_wires))
    for node in c.nodes:
        if isinstance(node, GateNode):
            lines.append(f"gate {node.gate.name} fwd={node.fwd} ctc={node.ctc} out={node.out}")
        elif isinstance(node, Fork):
            lines.append(f"fork {node.src} -> {node.outs[0]} {node.outs[1]}")
        elif isinstance(node, And):
            lines.append(f"and {node.a} {node.b} -> {node.out}")
        elif isinstance(node, Not):
            lines.append(f"not {node.src} -> {node.out}")
        else:
            lines.append(f"const {node.bit} -> {node.out}")
    lines.append("output " + " ".join(c.outputs))
    return "\n".join(lines) + "\n"


def bundled_source(filename: str) -> str:
    """Text of one of the bundled ``.ctc`` circuits."""
    if filename not in BUNDLED:
        raise ValidationError(f"no bundled circuit named '{filename}'")
    return resources.files("evapctc").joinpath("circuits", filename).read_text(encoding="utf-8")


def load_bundled(filename: str) -> ParsedCircuit:
    return parse(bundled_source(filename))
