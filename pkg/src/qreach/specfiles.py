"""Combined specification files: an input section and an output section in
one document, for both the linear-constraint and the bit-vector grammars.

    lpspec format=1
    @in
    x1 >= 0 /\\ x1 <= 1
    @out
    x1 = 1

    bvspec format=1 width=6
    @in
    vars x1 x2
    (x1 & x2) = 0
    @out
    vars y1
    ~(y1 = 0)

Variables bind positionally: the input section to network inputs, the output
section to network outputs.  Multiple constraint lines in one section are
conjoined.
"""

from __future__ import annotations

from .bitvec import BvConj, BvSpec, format_bv, parse_bv
from .errors import ParseError
from .linprog import LinearProgram, format_lp, parse_lp


def _split_sections(lines):
    sections: dict[str, list[str]] = {}
    current = None
    for line_no, raw in lines:
        text = raw.split("#", 1)[0].strip()
        if not text:
            continue
        if text.startswith("@"):
            current = text[1:]
            if current in sections:
                raise ParseError(f"duplicate section @{current}", line_no)
            sections[current] = []
            continue
        if current is None:
            raise ParseError("content before the first @section marker", line_no)
        sections[current].append(text)
    return sections


def _header_fields(line, expected_kind):
    parts = line.split()
    if not parts or parts[0] != expected_kind:
        raise ParseError(f"expected {expected_kind!r} header")
    fields = {}
    for item in parts[1:]:
        key, sep, value = item.partition("=")
        if not sep:
            raise ParseError(f"bad header field {item!r}")
        fields[key] = value
    if fields.get("format") != "1":
        raise ParseError("unsupported or missing format version")
    return fields


def _header_and_body(text: str, kind: str):
    lines = list(enumerate(text.splitlines(), start=1))
    idx = next((i for i, (_, t) in enumerate(lines)
                if t.strip() and not t.strip().startswith("#")), None)
    if idx is None:
        raise ParseError(f"empty {kind} file")
    fields = _header_fields(lines[idx][1].strip(), kind)
    return fields, lines[idx + 1:]


def load_lp_pair(text: str) -> tuple[LinearProgram, LinearProgram]:
    _fields, body = _header_and_body(text, "lpspec")
    sections = _split_sections(body)
    for required in ("in", "out"):
        if required not in sections:
            raise ParseError(f"missing @{required} section")
    l1 = parse_lp("\n".join(sections["in"]))
    l2 = parse_lp("\n".join(sections["out"]))
    return l1, l2


def format_lp_pair(l1: LinearProgram, l2: LinearProgram) -> str:
    return ("lpspec format=1\n@in\n" + format_lp(l1)
            + "@out\n" + format_lp(l2))


def _parse_bv_section(lines, width, line_hint):
    if not lines or not lines[0].startswith("vars"):
        raise ParseError(f"section must start with a 'vars' line ({line_hint})")
    names = tuple(lines[0].split()[1:])
    if not names:
        raise ParseError(f"empty variable list ({line_hint})")
    formulas = [parse_bv(text, width, names).formula for text in lines[1:]]
    if not formulas:
        raise ParseError(f"section has no formula ({line_hint})")
    combined = formulas[0]
    for f in formulas[1:]:
        combined = BvConj(combined, f)
    return BvSpec(width, names, combined)


def load_bv_pair(text: str) -> tuple[BvSpec, BvSpec]:
    fields, body = _header_and_body(text, "bvspec")
    try:
        width = int(fields["width"])
    except (KeyError, ValueError):
        raise ParseError("bvspec header needs width=<int>") from None
    sections = _split_sections(body)
    for required in ("in", "out"):
        if required not in sections:
            raise ParseError(f"missing @{required} section")
    phi1 = _parse_bv_section(sections["in"], width, "@in")
    phi2 = _parse_bv_section(sections["out"], width, "@out")
    return phi1, phi2


def format_bv_pair(phi1: BvSpec, phi2: BvSpec) -> str:
    assert phi1.width == phi2.width
    out = [f"bvspec format=1 width={phi1.width}"]
    for marker, spec in (("@in", phi1), ("@out", phi2)):
        out.append(marker)
        out.append("vars " + " ".join(spec.variables))
        out.append(format_bv(spec.formula))
    return "\n".join(out) + "\n"
