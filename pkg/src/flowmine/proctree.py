"""Block-structured process trees and their Petri-net realization.

Text notation for fixtures: ``->(a, X(b, c))`` for sequence/choice,
``+(a, b)`` for parallel, ``*(do, redo)`` for the binary loop and ``tau``
for the silent leaf. Activity names may be quoted with single quotes when
they contain delimiters.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Optional

from .petri import PetriNet, make_net

SEQUENCE = "sequence"
XOR = "xor"
PARALLEL = "parallel"
LOOP = "loop"
OPERATORS = (SEQUENCE, XOR, PARALLEL, LOOP)

_OP_SYMBOL = {SEQUENCE: "->", XOR: "X", PARALLEL: "+", LOOP: "*"}
_SYMBOL_OP = {v: k for k, v in _OP_SYMBOL.items()}


class TreeError(Exception):
    pass


@dataclass(frozen=True)
class ProcessTree:
    operator: Optional[str] = None
    label: Optional[str] = None
    children: tuple["ProcessTree", ...] = ()

    def __post_init__(self) -> None:
        if self.operator is None:
            if self.children:
                raise TreeError("leaves cannot have children")
        else:
            if self.operator not in OPERATORS:
                raise TreeError(f"unknown operator {self.operator!r}")
            if self.label is not None:
                raise TreeError("operator nodes cannot carry a label")
            if self.operator == LOOP:
                if len(self.children) != 2:
                    raise TreeError("loop takes exactly (do, redo)")
            elif len(self.children) < 2:
                raise TreeError(f"{self.operator} needs at least 2 children")

    @property
    def is_leaf(self) -> bool:
        return self.operator is None

    @property
    def is_tau(self) -> bool:
        return self.operator is None and self.label is None

    def alphabet(self) -> set[str]:
        if self.is_leaf:
            return set() if self.label is None else {self.label}
        out: set[str] = set()
        for child in self.children:
            out |= child.alphabet()
        return out

    def __str__(self) -> str:
        return format_tree(self)


def leaf(activity: str) -> ProcessTree:
    if not activity:
        raise TreeError("leaf activity must be nonempty")
    return ProcessTree(label=activity)


def tau() -> ProcessTree:
    return ProcessTree()


def seq(*children: ProcessTree) -> ProcessTree:
    return ProcessTree(operator=SEQUENCE, children=tuple(children))


def xor(*children: ProcessTree) -> ProcessTree:
    return ProcessTree(operator=XOR, children=tuple(children))


def par(*children: ProcessTree) -> ProcessTree:
    return ProcessTree(operator=PARALLEL, children=tuple(children))


def loop(do: ProcessTree, redo: ProcessTree) -> ProcessTree:
    return ProcessTree(operator=LOOP, children=(do, redo))


def format_tree(tree: ProcessTree) -> str:
    if tree.is_tau:
        return "tau"
    if tree.is_leaf:
        name = tree.label or ""
        if any(ch in name for ch in "(),' \t\n") or name == "tau":
            return "'" + name.replace("'", "\\'") + "'"
        return name
    inner = ", ".join(format_tree(c) for c in tree.children)
    return f"{_OP_SYMBOL[tree.operator]}({inner})"


def _tokenize(text: str) -> Iterator[str]:
    i = 0
    while i < len(text):
        ch = text[i]
        if ch.isspace():
            i += 1
        elif ch in "(),":
            yield ch
            i += 1
        elif ch == "'":
            j = i + 1
            out = []
            while j < len(text):
                if text[j] == "\\" and j + 1 < len(text):
                    out.append(text[j + 1])
                    j += 2
                elif text[j] == "'":
                    break
                else:
                    out.append(text[j])
                    j += 1
            else:
                raise TreeError("unterminated quoted name")
            yield "'" + "".join(out)
            i = j + 1
        else:
            j = i
            while j < len(text) and text[j] not in "(),'" and not text[j].isspace():
                j += 1
            yield text[i:j]
            i = j


def parse_tree(text: str) -> ProcessTree:
    tokens = list(_tokenize(text))
    pos = 0

    def peek() -> Optional[str]:
        return tokens[pos] if pos < len(tokens) else None

    def take(expected: Optional[str] = None) -> str:
        nonlocal pos
        if pos >= len(tokens):
            raise TreeError(f"unexpected end of input (wanted {expected or 'a token'})")
        tok = tokens[pos]
        if expected is not None and tok != expected:
            raise TreeError(f"expected {expected!r}, got {tok!r}")
        pos += 1
        return tok

    def parse_node() -> ProcessTree:
        tok = take()
        if tok.startswith("'"):
            return leaf(tok[1:])
        if tok in _SYMBOL_OP and peek() == "(":
            op = _SYMBOL_OP[tok]
            take("(")
            children = [parse_node()]
            while peek() == ",":
                take(",")
                children.append(parse_node())
            take(")")
            return ProcessTree(operator=op, children=tuple(children))
        if tok == "tau":
            return tau()
        if tok in "(),":
            raise TreeError(f"unexpected {tok!r}")
        return leaf(tok)

    tree = parse_node()
    if pos != len(tokens):
        raise TreeError(f"trailing input after tree: {tokens[pos:]!r}")
    return tree


class _NetBuilder:
    def __init__(self) -> None:
        self.places: list[str] = []
        self.transitions: list[tuple[str, Optional[str]]] = []
        self.arcs: list[tuple[str, str]] = []
        self._n = 0

    def place(self, hint: str = "p") -> str:
        self._n += 1
        name = f"{hint}{self._n}"
        self.places.append(name)
        return name

    def transition(self, label: Optional[str], hint: str) -> str:
        self._n += 1
        name = f"{hint}{self._n}"
        self.transitions.append((name, label))
        return name

    def connect(self, t: str, inputs: list[str], outputs: list[str]) -> None:
        for p in inputs:
            self.arcs.append((p, t))
        for p in outputs:
            self.arcs.append((t, p))


def tree_to_petri(tree: ProcessTree) -> PetriNet:
    """Standard recursive construction yielding a workflow net.

    Children are wired between entry/exit places; choices share the
    boundary places, parallel blocks get silent split/join transitions and
    loops get silent enter/exit transitions so that the global source never
    gains input arcs and the sink never gains output arcs.
    """
    builder = _NetBuilder()
    source = builder.place("src")
    sink = builder.place("snk")

    def build(node: ProcessTree, entry: str, exit_: str) -> None:
        if node.is_leaf:
            t = builder.transition(node.label, "t" if node.label else "tau")
            builder.connect(t, [entry], [exit_])
            return
        if node.operator == SEQUENCE:
            boundaries = [entry]
            for _ in range(len(node.children) - 1):
                boundaries.append(builder.place())
            boundaries.append(exit_)
            for child, (a, b) in zip(node.children, zip(boundaries, boundaries[1:])):
                build(child, a, b)
        elif node.operator == XOR:
            for child in node.children:
                build(child, entry, exit_)
        elif node.operator == PARALLEL:
            split = builder.transition(None, "split")
            join = builder.transition(None, "join")
            entries, exits = [], []
            for child in node.children:
                a, b = builder.place(), builder.place()
                entries.append(a)
                exits.append(b)
                build(child, a, b)
            builder.connect(split, [entry], entries)
            builder.connect(join, exits, [exit_])
        elif node.operator == LOOP:
            do, redo = node.children
            a, m = builder.place("do"), builder.place("mid")
            enter = builder.transition(None, "enter")
            leave = builder.transition(None, "leave")
            builder.connect(enter, [entry], [a])
            builder.connect(leave, [m], [exit_])
            build(do, a, m)
            build(redo, m, a)
        else:  # pragma: no cover - constructor forbids unknown operators
            raise TreeError(f"unknown operator {node.operator!r}")

    build(tree, source, sink)
    return make_net(builder.places, builder.transitions, builder.arcs,
                    {source: 1}, {sink: 1})
