"""Chord diagrams, Gauss codes of knot diagrams, and the Conway skein oracle.

Positions on the circle are numbered ``1..2n`` in the user-facing forms
(text and JSON) and ``0..2n-1`` internally.
"""
from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from functools import cached_property

import numpy as np


class DiagramError(ValueError):
    """Malformed chord diagram or Gauss code."""


class SkeinBudgetError(RuntimeError):
    """The skein recursion was asked to handle too many crossings."""


# -- chord diagrams -----------------------------------------------------------

@dataclass(frozen=True)
class ChordDiagram:
    """Perfect matching on ``2n`` cyclically ordered positions.

    ``pairs`` holds 1-based position pairs ``(a, b)`` with ``a < b``, sorted.
    Two chord diagrams are isomorphic when they differ by a rotation of the
    positions; see :meth:`canonical`.
    """

    pairs: tuple

    def __post_init__(self):
        pairs = tuple(sorted(tuple(sorted((int(a), int(b)))) for a, b in self.pairs))
        flat = [p for pr in pairs for p in pr]
        size = 2 * len(pairs)
        if sorted(flat) != list(range(1, size + 1)):
            raise DiagramError(f"pairs {pairs} do not form a perfect matching of 1..{size}")
        object.__setattr__(self, 'pairs', pairs)

    @property
    def n(self) -> int:
        return len(self.pairs)

    @property
    def size(self) -> int:
        return 2 * len(self.pairs)

    @cached_property
    def partner(self) -> tuple:
        """0-based involution ``position -> paired position``."""
        out = [0] * self.size
        for a, b in self.pairs:
            out[a - 1], out[b - 1] = b - 1, a - 1
        return tuple(out)

    @classmethod
    def from_partner(cls, partner):
        return cls(tuple((i + 1, j + 1) for i, j in enumerate(partner) if i < j))

    def rotated(self, k: int = 1):
        """Shift every endpoint forward by ``k`` positions."""
        m = self.size
        return type(self)(tuple(((a - 1 + k) % m + 1, (b - 1 + k) % m + 1) for a, b in self.pairs))

    def word(self) -> tuple:
        """Chord labels read around the circle, labelled by first appearance."""
        labels = {}
        out = []
        for i in range(self.size):
            key = min(i, self.partner[i])
            out.append(labels.setdefault(key, len(labels)))
        return tuple(out)

    def canonical(self) -> tuple:
        """Lexicographically least word over all rotations."""
        return min(self.rotated(k).word() for k in range(max(1, self.size)))

    def isomorphic(self, other: "ChordDiagram") -> bool:
        return self.n == other.n and self.canonical() == other.canonical()

    def interleaved(self, c1, c2) -> bool:
        (a, b), (c, d) = self.pairs[c1], self.pairs[c2]
        return (a < c < b) != (a < d < b)

    def to_json(self) -> dict:
        return {"n": self.n, "pairs": [list(p) for p in self.pairs]}

    @classmethod
    def from_json(cls, data):
        d = cls(tuple(tuple(p) for p in data["pairs"]))
        if "n" in data and data["n"] != d.n:
            raise DiagramError(f"declared n={data['n']} but {d.n} pairs given")
        return d

    def __str__(self):
        return ",".join(f"{a}-{b}" for a, b in self.pairs)


class GaussDiagram(ChordDiagram):
    """Chord diagram whose endpoint positions are fixed by the circle orientation.

    Unlike chord diagrams, two Gauss diagrams are equal only if their pairs
    agree position by position; rotating gives a different Gauss diagram.
    """

    def as_chord_diagram(self) -> ChordDiagram:
        return ChordDiagram(self.pairs)


def x_diagram(n: int, cls=ChordDiagram):
    """The diagram on ``n`` chords in which every two chords cross."""
    return cls(tuple((i, i + n) for i in range(1, n + 1)))


def parse_diagram(text: str, cls=GaussDiagram):
    """Parse ``"w"``, ``"X"``, ``"X3"`` or an explicit pairing ``"1-3,2-4"``."""
    s = text.strip()
    if s == "w":
        return cls(((1, 2),))
    m = re.fullmatch(r"X(\d*)", s)
    if m:
        return x_diagram(int(m.group(1) or 2), cls)
    try:
        pairs = [tuple(int(x) for x in item.split("-")) for item in s.split(",")]
    except ValueError as exc:
        raise DiagramError(f"cannot parse diagram {text!r}") from exc
    if any(len(p) != 2 for p in pairs):
        raise DiagramError(f"cannot parse diagram {text!r}")
    return cls(tuple(pairs))


def intersecting_pairs(d: ChordDiagram) -> int:
    """Number of unordered chord pairs whose endpoints interleave."""
    return sum(d.interleaved(i, j) for i, j in itertools.combinations(range(d.n), 2))


def induced(d: ChordDiagram, chords) -> ChordDiagram:
    """Sub-diagram on the chosen chord indices, positions renumbered in order."""
    ends = sorted(p for c in chords for p in d.pairs[c])
    rank = {p: k + 1 for k, p in enumerate(ends)}
    return ChordDiagram(tuple((rank[d.pairs[c][0]], rank[d.pairs[c][1]]) for c in chords))


def count_subdiagrams(d: ChordDiagram, pattern: ChordDiagram) -> int:
    """Number of chord subsets of ``d`` whose induced diagram is isomorphic to ``pattern``."""
    k = pattern.n
    if k > d.n:
        return 0
    target = pattern.canonical()
    return sum(induced(d, sub).canonical() == target
               for sub in itertools.combinations(range(d.n), k))


# -- Gauss codes --------------------------------------------------------------

_TOKEN = re.compile(r"([OU])(\d+)([+-])")


@dataclass(frozen=True)
class Token:
    cid: int
    over: bool
    sign: int

    def __str__(self):
        return f"{'O' if self.over else 'U'}{self.cid}{'+' if self.sign > 0 else '-'}"


@dataclass(frozen=True)
class KnotDiagramCode:
    """Signed over/under Gauss code of a one-component knot diagram."""

    tokens: tuple

    def __post_init__(self):
        object.__setattr__(self, 'tokens', tuple(self.tokens))
        _validate_tokens(self.tokens)

    @property
    def crossings(self) -> int:
        return len(self.tokens) // 2

    def __str__(self):
        return " ".join(str(t) for t in self.tokens)

    def relabelled(self) -> "KnotDiagramCode":
        """Renumber crossings 1, 2, ... in order of first appearance."""
        ids = {}
        for t in self.tokens:
            ids.setdefault(t.cid, len(ids) + 1)
        return KnotDiagramCode(tuple(Token(ids[t.cid], t.over, t.sign) for t in self.tokens))

    def rotated(self, k: int) -> "KnotDiagramCode":
        if not self.tokens:
            return self
        k %= len(self.tokens)
        return KnotDiagramCode(self.tokens[k:] + self.tokens[:k])

    def mirrored(self) -> "KnotDiagramCode":
        return KnotDiagramCode(tuple(Token(t.cid, not t.over, -t.sign) for t in self.tokens))


def _validate_tokens(tokens, where=None):
    seen = {}
    for pos, t in enumerate(tokens):
        seen.setdefault(t.cid, []).append((pos, t))
    for cid, occ in seen.items():
        loc = where(occ[-1][0]) if where else f"token {occ[-1][0] + 1}"
        if len(occ) != 2:
            raise DiagramError(f"crossing {cid} appears {len(occ)} times (at {loc})")
        (_, a), (_, b) = occ
        if a.over == b.over:
            raise DiagramError(f"crossing {cid} lacks an over/under partner (at {loc})")
        if a.sign != b.sign:
            raise DiagramError(f"crossing {cid} has inconsistent signs (at {loc})")


def parse_gauss_code(text: str) -> KnotDiagramCode:
    """Parse whitespace-separated tokens such as ``"O1+ U2+ O3+ U1+ O2+ U3+"``.

    Errors name the 1-based token position and its character offset.
    """
    tokens = []
    offsets = []
    for m in re.finditer(r"\S+", text):
        tm = _TOKEN.fullmatch(m.group())
        if not tm:
            raise DiagramError(f"bad token {m.group()!r} at position {len(tokens) + 1} "
                               f"(char {m.start()})")
        tokens.append(Token(int(tm.group(2)), tm.group(1) == "O",
                            1 if tm.group(3) == "+" else -1))
        offsets.append(m.start())
    _validate_tokens(tokens, where=lambda p: f"position {p + 1}, char {offsets[p]}")
    return KnotDiagramCode(tuple(tokens))


def chord_diagram_of(code: KnotDiagramCode) -> ChordDiagram:
    """Pair the two occurrences of each crossing along the traversal."""
    first = {}
    pairs = []
    for pos, t in enumerate(code.tokens):
        if t.cid in first:
            pairs.append((first[t.cid] + 1, pos + 1))
        else:
            first[t.cid] = pos
    return ChordDiagram(tuple(pairs))


def x_crossing_upper_bound(code: KnotDiagramCode) -> int:
    return intersecting_pairs(chord_diagram_of(code))


def diagram_stats(code: KnotDiagramCode) -> dict:
    d = chord_diagram_of(code)
    return {"crossings": code.crossings, "pairs": intersecting_pairs(d),
            "x3": count_subdiagrams(d, x_diagram(3)) if d.n >= 3 else 0,
            "writhe": sum(t.sign for t in code.tokens) // 2}


# -- Conway polynomial by skein recursion --------------------------------------

def _poly_add(p, q, shift=0, scale=1):
    out = list(p) + [0] * max(0, len(q) + shift - len(p))
    for k, c in enumerate(q):
        out[k + shift] += scale * c
    while out and out[-1] == 0:
        out.pop()
    return tuple(out)


def _canonical_link(comps):
    ids = {}
    out = []
    for comp in comps:
        row = []
        for cid, over, sign in comp:
            row.append((ids.setdefault(cid, len(ids)), over, sign))
        out.append(tuple(row))
    return tuple(out)


def _first_non_descending(comps):
    seen = set()
    for ci, comp in enumerate(comps):
        for pi, (cid, over, _) in enumerate(comp):
            if cid in seen:
                continue
            seen.add(cid)
            if not over:
                return ci, pi
    return None


def _switch(comps, cid):
    return tuple(tuple((c, (not o) if c == cid else o, -s if c == cid else s) for c, o, s in comp)
                 for comp in comps)


def _smooth(comps, cid):
    where = [(ci, pi) for ci, comp in enumerate(comps) for pi, t in enumerate(comp) if t[0] == cid]
    (ca, ia), (cb, ib) = where
    rest = [comp for k, comp in enumerate(comps) if k not in (ca, cb)]
    if ca == cb:
        seq = comps[ca]
        new = [seq[ia + 1:ib], seq[ib + 1:] + seq[:ia]]
    else:
        a, b = comps[ca], comps[cb]
        new = [b[ib + 1:] + b[:ib] + a[ia + 1:] + a[:ia]]
    return tuple(rest + new)


def conway_polynomial(components, max_crossings: int = 16) -> tuple:
    """Coefficients ``(c0, c1, ...)`` of the Conway polynomial in ``z``.

    ``components`` is a sequence of token sequences (one per link
    component) with tokens ``(cid, over, sign)``.  The recursion always
    resolves the first crossing met from below, switching it towards a
    descending diagram and smoothing it.
    """
    comps = _canonical_link([tuple((t.cid, t.over, t.sign) if isinstance(t, Token) else tuple(t)
                                   for t in comp) for comp in components])
    ncross = sum(len(c) for c in comps) // 2
    if ncross > max_crossings:
        raise SkeinBudgetError(f"{ncross} crossings exceed the skein budget of {max_crossings}")
    memo = {}

    def rec(state):
        state = _canonical_link(state)
        if state in memo:
            return memo[state]
        hit = _first_non_descending(state)
        if hit is None:
            out = (1,) if len(state) == 1 else ()
        else:
            ci, pi = hit
            cid, _, sign = state[ci][pi]
            switched = rec(_switch(state, cid))
            smoothed = rec(_smooth(state, cid))
            out = _poly_add(switched, smoothed, shift=1, scale=sign)
        memo[state] = out
        return out

    return rec(comps)


def conway_a2_skein(code: KnotDiagramCode, max_crossings: int = 16) -> int:
    """Coefficient of ``z^2`` in the Conway polynomial of a knot code."""
    poly = conway_polynomial([code.tokens], max_crossings)
    return poly[2] if len(poly) > 2 else 0


# -- diagrams from braids and plats --------------------------------------------

@dataclass(frozen=True)
class Layered:
    """Planar diagram drawn as horizontal layers on ``width`` strand positions.

    ``word`` lists signed generators ``+i`` / ``-i`` (1-based), each
    crossing positions ``i-1`` and ``i`` between consecutive levels.
    ``closure`` is ``"braid"`` (bottom reconnects to top on the same
    position) or ``"plat"`` (neighbouring positions joined by caps above and
    cups below).
    """

    width: int
    word: tuple
    closure: str = "braid"

    def __post_init__(self):
        object.__setattr__(self, 'word', tuple(int(g) for g in self.word))
        if self.closure not in ("braid", "plat"):
            raise DiagramError(f"unknown closure {self.closure!r}")
        if self.closure == "plat" and self.width % 2:
            raise DiagramError("plat closure needs an even number of strands")
        for g in self.word:
            if g == 0 or abs(g) >= self.width:
                raise DiagramError(f"generator {g} out of range for width {self.width}")


def _step(word, level, pos, down):
    """Follow one layer from ``(level, pos)``; return new level, pos and crossing info."""
    k = level if down else level - 1
    g = word[k]
    i = abs(g) - 1
    new_level = level + 1 if down else level - 1
    if pos == i:
        new_pos = i + 1
    elif pos == i + 1:
        new_pos = i
    else:
        return new_level, pos, None
    # the segment joining position i+1 on the upper level to i on the lower
    # level lies on top for a positive generator
    upper_pos = pos if down else new_pos
    over = (upper_pos == i + 1) == (g > 0)
    direction = (new_pos - pos, -1 if down else 1)
    return new_level, new_pos, (k, over, direction)


def trace_layered(diagram: Layered):
    """Walk every component; return lists of ``(crossing index, over, direction)``.

    Also returns the visited ``(level, position)`` path of each component for
    geometric realisation.
    """
    word, depth, width = diagram.word, len(diagram.word), diagram.width
    visited = set()
    comps, paths = [], []
    for start in range(width):
        if (0, start, True) in visited or (0, start, False) in visited:
            continue
        level, pos, down = 0, start, True
        events, path = [], []
        while (level, pos, down) not in visited:
            visited.add((level, pos, down))
            path.append((level, pos))
            if down and level == depth:
                if diagram.closure == "braid":
                    level = 0
                else:
                    pos, down = pos ^ 1, False
                path.append(("turn", level, pos, down))
                continue
            if not down and level == 0:
                if diagram.closure == "braid":
                    level = depth
                else:
                    pos, down = pos ^ 1, True
                path.append(("turn", level, pos, down))
                continue
            level, pos, info = _step(word, level, pos, down)
            if info is not None:
                events.append(info)
        comps.append(events)
        paths.append(path)
    return comps, paths


def layered_components(diagram: Layered):
    """Signed Gauss codes (token tuples) of every component of the diagram."""
    comps, _ = trace_layered(diagram)
    dirs = {}
    for events in comps:
        for k, over, d in events:
            dirs.setdefault(k, {})[over] = d
    signs = {}
    for k, pair in dirs.items():
        (ox, oy), (ux, uy) = pair[True], pair[False]
        signs[k] = 1 if ox * uy - oy * ux > 0 else -1
    return [tuple(Token(k + 1, over, signs[k]) for k, over, _ in events) for events in comps]


def _normalise_code(tokens) -> KnotDiagramCode:
    code = KnotDiagramCode(tuple(tokens))
    for k, t in enumerate(code.tokens):
        if t.over:
            return code.rotated(k).relabelled()
    return code


def layered_code(diagram: Layered) -> KnotDiagramCode:
    comps = layered_components(diagram)
    if len(comps) != 1:
        raise DiagramError(f"diagram has {len(comps)} components, expected a knot")
    return _normalise_code(comps[0])


def torus_layered(q: int) -> Layered:
    return Layered(2, (1,) * q, "braid")


def twist_layered(k: int) -> Layered:
    """Four-plat picture of the twist knot with ``k + 2`` crossings.

    ``k = 1`` is the trefoil and ``k = 2`` the figure-eight knot.  The clasp
    is the final pair of generators on the middle strands.
    """
    if k < 1:
        raise DiagramError("twist count must be >= 1")
    return Layered(4, (2,) + (-1,) * (k - 1) + (2, 2), "plat")


FIGURE_EIGHT_CODE = "O1+ U2+ O3- U4- O2+ U1+ O4- U3-"


def zoo_code(name: str) -> KnotDiagramCode:
    """Standard reduced code of a named family member.

    Accepts ``unknot``, ``torus2q(q)``, ``twist(k)``, ``figure-eight``, and the
    same names in ``family:q=3`` form.
    """
    s = name.strip().replace(" ", "")
    if s in ("unknot", "circle"):
        return KnotDiagramCode(())
    if s in ("figure-eight", "figure8", "figure_eight", "4_1"):
        return parse_gauss_code(FIGURE_EIGHT_CODE)
    m = re.fullmatch(r"torus2q(?:\((\d+)\)|:q=(\d+))", s)
    if m:
        q = int(m.group(1) or m.group(2))
        if q < 3 or q % 2 == 0:
            raise DiagramError("torus2q needs an odd q >= 3")
        return layered_code(torus_layered(q))
    m = re.fullmatch(r"twist(?:\((\d+)\)|:k=(\d+))", s)
    if m:
        return layered_code(twist_layered(int(m.group(1) or m.group(2))))
    raise DiagramError(f"unknown diagram family {name!r}")


# -- Reidemeister moves on codes -------------------------------------------------

def add_kink(code: KnotDiagramCode, position: int, over_first: bool = True,
             sign: int = 1) -> KnotDiagramCode:
    """Insert a first-move curl (adjacent ``Oc Uc`` or ``Uc Oc``) before ``position``."""
    cid = max((t.cid for t in code.tokens), default=0) + 1
    pair = (Token(cid, over_first, sign), Token(cid, not over_first, sign))
    toks = code.tokens[:position] + pair + code.tokens[position:]
    return KnotDiagramCode(toks)


def braid_word_moves(word):
    """Words related to ``word`` by second and third Reidemeister moves.

    Yields words obtained by inserting a cancelling pair at each slot and by
    replacing any ``a b a`` with ``b a b`` for adjacent generators of equal sign.
    """
    word = tuple(word)
    width_gens = {abs(g) for g in word} | {1}
    for slot in range(len(word) + 1):
        for g in sorted(width_gens):
            yield word[:slot] + (g, -g) + word[slot:]
    for k in range(len(word) - 2):
        a, b, c = word[k:k + 3]
        if a == c and abs(abs(a) - abs(b)) == 1 and (a > 0) == (b > 0):
            yield word[:k] + (b, a, b) + word[k + 3:]


def random_code_diagram(n: int, rng) -> ChordDiagram:
    perm = rng.permutation(2 * n)
    return ChordDiagram(tuple((int(perm[2 * k]) + 1, int(perm[2 * k + 1]) + 1) for k in range(n)))


def pairing_matrix(d: ChordDiagram) -> np.ndarray:
    """Boolean chord intersection matrix."""
    m = np.zeros((d.n, d.n), dtype=bool)
    for i, j in itertools.combinations(range(d.n), 2):
        m[i, j] = m[j, i] = d.interleaved(i, j)
    return m
