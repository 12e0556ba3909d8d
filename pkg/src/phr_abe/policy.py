"""Monotone threshold access trees.

Policy text grammar (keywords are case-insensitive, attributes are not)::

    expr   := term { "or" term }
    term   := factor { "and" factor }
    factor := ATTR | "(" expr ")" | INT "of" "(" expr { "," expr } ")"

``a and b and c`` becomes one 3-of-3 gate and ``a or b`` a 1-of-2 gate.
Parenthesised sub-expressions stay separate gates. Attributes containing
spaces or punctuation are written in double quotes.

Nodes are addressed by their path from the root: ``()`` is the root and
``(2, 1)`` is the first child of the root's second child. Child indices are
1-based, which is also the evaluation point used for secret sharing.
"""

import re
from dataclasses import dataclass

from .encoding import Reader, Writer
from .errors import MalformedError, PolicySyntaxError
from .pairing import ORDER


@dataclass(frozen=True)
class Leaf:
    attribute: str

    def __post_init__(self):
        attr = self.attribute.strip()
        if not attr:
            raise ValueError("attribute must be a non-empty string")
        object.__setattr__(self, "attribute", attr)

    @property
    def threshold(self):
        return 1


@dataclass(frozen=True)
class Gate:
    threshold: int
    children: tuple

    def __post_init__(self):
        object.__setattr__(self, "children", tuple(self.children))
        if not self.children:
            raise ValueError("gate needs at least one child")
        if not 1 <= self.threshold <= len(self.children):
            raise ValueError(
                f"threshold {self.threshold} out of range for {len(self.children)} children"
            )


def normalize_attribute(attr):
    attr = attr.strip()
    if not attr:
        raise ValueError("attribute must be a non-empty string")
    return attr


def normalize_attributes(attrs):
    out = [normalize_attribute(a) for a in attrs]
    if len(set(out)) != len(out):
        raise ValueError("duplicate attributes")
    return out


def iter_nodes(node, path=()):
    """Depth-first, left-to-right (path, node) pairs."""
    yield path, node
    if isinstance(node, Gate):
        for i, child in enumerate(node.children, 1):
            yield from iter_nodes(child, path + (i,))


def leaves(node):
    return [(path, n) for path, n in iter_nodes(node) if isinstance(n, Leaf)]


def node_at(root, path):
    node = root
    for i in path:
        node = node.children[i - 1]
    return node


# -- text form ---------------------------------------------------------------

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<lparen>\()
  | (?P<rparen>\))
  | (?P<comma>,)
  | (?P<quoted>"(?:[^"\\]|\\.)*")
  | (?P<word>[^\s(),"]+)
    """,
    re.VERBOSE,
)
_KEYWORDS = {"and", "or", "of"}
_BARE = re.compile(r"[A-Za-z0-9_.:@/+\-]+")


def _tokenize(text):
    pos = 0
    out = []
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise PolicySyntaxError("unterminated quoted attribute", pos)
        kind = m.lastgroup
        if kind != "ws":
            value = m.group()
            if kind == "quoted":
                value = re.sub(r"\\(.)", r"\1", value[1:-1])
                out.append(("attr", value, pos))
            elif kind == "word":
                low = value.lower()
                if low in _KEYWORDS:
                    out.append((low, value, pos))
                else:
                    out.append(("word", value, pos))
            else:
                out.append((kind, value, pos))
        pos = m.end()
    out.append(("end", "", len(text)))
    return out


class _Parser:
    def __init__(self, text):
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self, ahead=0):
        return self.toks[min(self.i + ahead, len(self.toks) - 1)]

    def take(self, kind):
        tok = self.peek()
        if tok[0] != kind:
            want = {"rparen": "')'", "lparen": "'('", "end": "end of policy"}.get(kind, kind)
            got = tok[1] or "end of policy"
            raise PolicySyntaxError(f"expected {want}, found {got!r}", tok[2])
        self.i += 1
        return tok

    def parse(self):
        if self.peek()[0] == "end":
            raise PolicySyntaxError("empty policy", 0)
        node = self.expr()
        self.take("end")
        return node

    def _chain(self, sub, keyword, threshold_of):
        first = sub()
        items = [first]
        while self.peek()[0] == keyword:
            self.i += 1
            items.append(sub())
        if len(items) == 1:
            return first
        return Gate(threshold_of(len(items)), tuple(items))

    def expr(self):
        return self._chain(self.term, "or", lambda n: 1)

    def term(self):
        return self._chain(self.factor, "and", lambda n: n)

    def factor(self):
        kind, value, pos = self.peek()
        if kind == "lparen":
            self.i += 1
            node = self.expr()
            self.take("rparen")
            return node
        if kind == "word" and value.isdigit() and self.peek(1)[0] == "of":
            self.i += 2
            self.take("lparen")
            children = [self.expr()]
            while self.peek()[0] == "comma":
                self.i += 1
                children.append(self.expr())
            self.take("rparen")
            k = int(value)
            if not 1 <= k <= len(children):
                raise PolicySyntaxError(
                    f"threshold {k} out of range for {len(children)} children", pos
                )
            return Gate(k, tuple(children))
        if kind in ("word", "attr"):
            self.i += 1
            if not value.strip():
                raise PolicySyntaxError("empty attribute", pos)
            return Leaf(value)
        raise PolicySyntaxError(f"unexpected {value or 'end of policy'!r}", pos)


def parse_policy(text):
    """Parse policy text into a tree of :class:`Gate` and :class:`Leaf`."""
    return _Parser(text).parse()


def _quote(attr):
    if _BARE.fullmatch(attr) and attr.lower() not in _KEYWORDS and not attr.isdigit():
        return attr
    return '"' + attr.replace("\\", "\\\\").replace('"', '\\"') + '"'


def to_text(node):
    """Normalized policy text; ``parse_policy(to_text(t)) == t``."""
    if isinstance(node, Leaf):
        return _quote(node.attribute)

    def child(c):
        s = to_text(c)
        return f"({s})" if isinstance(c, Gate) else s

    n = len(node.children)
    if n >= 2 and node.threshold == n:
        return " and ".join(child(c) for c in node.children)
    if n >= 2 and node.threshold == 1:
        return " or ".join(child(c) for c in node.children)
    return f"{node.threshold} of (" + ", ".join(to_text(c) for c in node.children) + ")"


# -- canonical bytes ---------------------------------------------------------

_LEAF, _GATE = 0, 1


def encode_tree(node, w=None):
    w = w if w is not None else Writer()
    if isinstance(node, Leaf):
        w.u8(_LEAF).text(node.attribute)
    else:
        w.u8(_GATE).u16(node.threshold).u16(len(node.children))
        for c in node.children:
            encode_tree(c, w)
    return w


def tree_to_bytes(node):
    return encode_tree(node).getvalue()


def decode_tree(r, depth=0):
    if depth > 64:
        raise MalformedError("policy tree too deep")
    tag = r.u8()
    try:
        if tag == _LEAF:
            return Leaf(r.text())
        if tag == _GATE:
            k, n = r.u16(), r.u16()
            return Gate(k, tuple(decode_tree(r, depth + 1) for _ in range(n)))
    except ValueError as exc:
        if isinstance(exc, MalformedError):
            raise
        raise MalformedError(f"invalid policy tree: {exc}") from None
    raise MalformedError(f"unknown policy node tag {tag}")


def tree_from_bytes(data):
    r = Reader(data, "policy tree")
    node = decode_tree(r)
    r.done()
    return node


# -- evaluation --------------------------------------------------------------


@dataclass(frozen=True)
class Assignment:
    """Which children each used gate relies on, and which leaves are used.

    ``chosen`` maps gate paths to the sorted 1-based indices of exactly
    ``threshold`` children.
    """

    chosen: dict
    leaves: tuple

    @property
    def size(self):
        return len(self.leaves)


def _cost(node, attrs, path, memo):
    """Minimum leaf count needed to satisfy ``node`` (None if impossible)."""
    if isinstance(node, Leaf):
        cost = 1 if node.attribute in attrs else None
        memo[path] = (cost, None)
        return cost
    options = []
    for i, child in enumerate(node.children, 1):
        c = _cost(child, attrs, path + (i,), memo)
        if c is not None:
            options.append((c, i))
    if len(options) < node.threshold:
        memo[path] = (None, None)
        return None
    # fewest leaves first; ties go to the leftmost child
    options.sort()
    picked = options[: node.threshold]
    cost = sum(c for c, _ in picked)
    memo[path] = (cost, tuple(sorted(i for _, i in picked)))
    return cost


def satisfies(tree, attrs):
    """Return a minimal-leaf :class:`Assignment`, or None if unsatisfied."""
    attrs = frozenset(a.strip() for a in attrs)
    memo = {}
    if _cost(tree, attrs, (), memo) is None:
        return None
    chosen = {}
    used = []

    def walk(node, path):
        if isinstance(node, Leaf):
            used.append(path)
            return
        picks = memo[path][1]
        chosen[path] = picks
        for i in picks:
            walk(node.children[i - 1], path + (i,))

    walk(tree, ())
    return Assignment(chosen, tuple(used))


def evaluate(tree, attrs):
    """Plain boolean evaluation."""
    attrs = frozenset(attrs)
    if isinstance(tree, Leaf):
        return tree.attribute in attrs
    return sum(evaluate(c, attrs) for c in tree.children) >= tree.threshold


# -- secret sharing ----------------------------------------------------------


def eval_poly(coeffs, x):
    """Horner evaluation mod the group order; coeffs[0] is the constant."""
    acc = 0
    for c in reversed(coeffs):
        acc = (acc * x + c) % ORDER
    return acc


def share_secret(tree, secret, rng):
    """Split ``secret`` down the tree.

    Every node x gets a random polynomial q_x of degree threshold-1 whose
    constant term is q_parent(index(x)); the root's constant term is the
    secret. Returns {path: q_x(0)} for every node.
    """
    shares = {}

    def walk(node, path, value):
        shares[path] = value
        if isinstance(node, Gate):
            coeffs = [value] + [rng.randrange(ORDER) for _ in range(node.threshold - 1)]
            for i, child in enumerate(node.children, 1):
                walk(child, path + (i,), eval_poly(coeffs, i))

    walk(tree, (), secret % ORDER)
    return shares


def lagrange_coeff(i, indices):
    """Delta_{i,S}(0) = prod_{j in S, j != i} (0 - j) / (i - j) mod p."""
    indices = list(indices)
    if len(set(indices)) != len(indices):
        raise ValueError("duplicate interpolation indices")
    if i not in indices:
        raise ValueError(f"index {i} not in interpolation set")
    if any(j % ORDER == 0 for j in indices):
        raise ValueError("interpolation index must be nonzero")
    num, den = 1, 1
    for j in indices:
        if j != i:
            num = num * (-j) % ORDER
            den = den * (i - j) % ORDER
    return num * pow(den, -1, ORDER) % ORDER
