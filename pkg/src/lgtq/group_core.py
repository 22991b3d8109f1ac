"""Finite-group arithmetic and regular-representation permutation operators.

Elements are referred to by integer index.  The Cayley table is stored with
the *left* factor as row index, ``cayley[a][b] = a * b``.  The quaternion group
ships built in, in the canonical ordering ``(1, -1, I, -I, J, -J, K, -K)``;
any other finite group can be loaded from a JSON file.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

Q8_LABELS = ("1", "-1", "I", "-I", "J", "-J", "K", "-K")


class GroupError(ValueError):
    """Raised for malformed group definitions."""


@dataclass(frozen=True)
class FiniteGroup:
    """Immutable finite group given by its multiplication table.

    Attributes
    ----------
    labels : tuple of str
        Element names, one per index.
    cayley : numpy.ndarray
        ``(d, d)`` integer table, ``cayley[a, b]`` is the index of ``a * b``.
    char_fund : numpy.ndarray
        Character of the fundamental representation, one real per element.
    identity : int
        Index of the identity element (derived).
    inverse : numpy.ndarray
        ``inverse[a]`` is the index of ``a^-1`` (derived).
    """

    labels: tuple[str, ...]
    cayley: np.ndarray
    char_fund: np.ndarray
    identity: int = field(default=-1)
    inverse: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        cayley = np.asarray(self.cayley, dtype=np.int64)
        chi = np.asarray(self.char_fund, dtype=float)
        d = len(self.labels)
        if cayley.shape != (d, d):
            raise GroupError(f"cayley table must be {d}x{d}, got {cayley.shape}")
        if chi.shape != (d,):
            raise GroupError(f"char_fund must have {d} entries, got {chi.shape}")
        if cayley.min() < 0 or cayley.max() >= d:
            raise GroupError("cayley table entries out of range")
        cayley.setflags(write=False)
        chi.setflags(write=False)
        object.__setattr__(self, "cayley", cayley)
        object.__setattr__(self, "char_fund", chi)
        object.__setattr__(self, "labels", tuple(self.labels))
        if self.identity < 0:
            object.__setattr__(self, "identity", _find_identity(cayley))
        if self.inverse is None:
            inv = _find_inverses(cayley, self.identity)
            inv.setflags(write=False)
            object.__setattr__(self, "inverse", inv)

    @property
    def order(self) -> int:
        return len(self.labels)

    def index(self, label: str) -> int:
        """Index of the element called ``label``."""
        try:
            return self.labels.index(label)
        except ValueError:
            raise KeyError(f"unknown element {label!r}") from None

    def __repr__(self) -> str:
        return f"FiniteGroup(order={self.order}, labels={self.labels})"


def _find_identity(cayley: np.ndarray) -> int:
    d = cayley.shape[0]
    ids = np.arange(d)
    for e in range(d):
        if np.array_equal(cayley[e], ids) and np.array_equal(cayley[:, e], ids):
            return e
    raise GroupError("no two-sided identity element in cayley table")


def _find_inverses(cayley: np.ndarray, identity: int) -> np.ndarray:
    d = cayley.shape[0]
    inv = np.full(d, -1, dtype=np.int64)
    for a in range(d):
        hits = np.flatnonzero(cayley[a] == identity)
        for b in hits:
            if cayley[b, a] == identity:
                inv[a] = b
                break
        if inv[a] < 0:
            raise GroupError(f"element {a} has no two-sided inverse")
    return inv


# ---------------------------------------------------------------------------
# construction
# ---------------------------------------------------------------------------

_UNIT_PRODUCTS = {
    ("1", "1"): (1, "1"), ("1", "I"): (1, "I"), ("1", "J"): (1, "J"), ("1", "K"): (1, "K"),
    ("I", "1"): (1, "I"), ("J", "1"): (1, "J"), ("K", "1"): (1, "K"),
    ("I", "I"): (-1, "1"), ("J", "J"): (-1, "1"), ("K", "K"): (-1, "1"),
    ("I", "J"): (1, "K"), ("J", "K"): (1, "I"), ("K", "I"): (1, "J"),
    ("J", "I"): (-1, "K"), ("K", "J"): (-1, "I"), ("I", "K"): (-1, "J"),
}


def _quaternion_product(a: str, b: str) -> str:
    sa, ua = (-1, a[1:]) if a.startswith("-") else (1, a)
    sb, ub = (-1, b[1:]) if b.startswith("-") else (1, b)
    s, u = _UNIT_PRODUCTS[(ua, ub)]
    return ("-" if s * sa * sb < 0 else "") + u


def make_q8() -> FiniteGroup:
    """The quaternion group in canonical ordering ``(1, -1, I, -I, J, -J, K, -K)``.

    The fundamental character is the trace of the SU(2) representative:
    ``(2, -2, 0, 0, 0, 0, 0, 0)``.
    """
    table = [[Q8_LABELS.index(_quaternion_product(a, b)) for b in Q8_LABELS] for a in Q8_LABELS]
    chi = [2.0, -2.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]
    return FiniteGroup(labels=Q8_LABELS, cayley=np.array(table), char_fund=np.array(chi))


def make_cyclic(n: int) -> FiniteGroup:
    """Z_n with real part of the U(1) character, ``cos(2 pi k / n)``, as ``char_fund``."""
    table = [[(a + b) % n for b in range(n)] for a in range(n)]
    chi = [float(np.cos(2 * np.pi * k / n)) for k in range(n)]
    labels = [str(k) for k in range(n)]
    if n == 2:
        labels = ["1", "-1"]
    return FiniteGroup(labels=tuple(labels), cayley=np.array(table), char_fund=np.array(chi))


def load_group(path: str | Path) -> FiniteGroup:
    """Load a group from JSON with keys ``labels``, ``cayley``, ``char_fund``.

    Identity and inverses are derived on load.  Raises :class:`GroupError` if
    they cannot be derived; axioms are *not* checked here, use
    :func:`validate_group` for that (a broken table still loads so the
    report can locate the violation).
    """
    data = json.loads(Path(path).read_text())
    missing = {"labels", "cayley", "char_fund"} - set(data)
    if missing:
        raise GroupError(f"group file missing keys: {sorted(missing)}")
    return FiniteGroup(labels=tuple(data["labels"]), cayley=np.array(data["cayley"]),
                       char_fund=np.array(data["char_fund"], dtype=float))


def group_to_json(group: FiniteGroup) -> str:
    return json.dumps({"labels": list(group.labels), "cayley": group.cayley.tolist(),
                       "char_fund": group.char_fund.tolist()}, indent=1)


# ---------------------------------------------------------------------------
# validation
# ---------------------------------------------------------------------------

@dataclass
class ValidationReport:
    """Outcome of :func:`validate_group`; each list holds offending index tuples."""

    identity_ok: bool = True
    inverse_failures: list[int] = field(default_factory=list)
    associativity_failures: list[tuple[int, int, int]] = field(default_factory=list)
    class_function_failures: list[tuple[int, int]] = field(default_factory=list)
    errors: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return (self.identity_ok and not self.inverse_failures and not self.associativity_failures
                and not self.class_function_failures and not self.errors)

    def summary(self) -> str:
        if self.ok:
            return "all group checks passed"
        parts = []
        if not self.identity_ok:
            parts.append("identity check failed")
        if self.inverse_failures:
            parts.append(f"{len(self.inverse_failures)} inverse failures")
        if self.associativity_failures:
            a, b, c = self.associativity_failures[0]
            parts.append(f"{len(self.associativity_failures)} associativity failures "
                         f"(first: a={a}, b={b}, c={c})")
        if self.class_function_failures:
            g, h = self.class_function_failures[0]
            parts.append(f"{len(self.class_function_failures)} class-function failures "
                         f"(first: g={g}, h={h})")
        parts.extend(self.errors)
        return "; ".join(parts)


def validate_group(group: FiniteGroup, tol: float = 1e-12) -> ValidationReport:
    """Check group axioms and that ``char_fund`` is a class function.

    Never raises on a malformed table; every violated triple is listed.
    """
    return validate_tables(group.cayley, group.char_fund, tol=tol)


def validate_tables(cayley, char_fund, tol: float = 1e-12) -> ValidationReport:
    """Same checks as :func:`validate_group` on raw (possibly broken) tables."""
    rep = ValidationReport()
    try:
        c = np.asarray(cayley, dtype=np.int64)
        chi = np.asarray(char_fund, dtype=float)
    except (TypeError, ValueError) as exc:
        rep.errors.append(f"unreadable tables: {exc}")
        return rep
    if c.ndim != 2 or c.shape[0] != c.shape[1]:
        rep.errors.append(f"cayley table is not square: shape {c.shape}")
        return rep
    d = c.shape[0]
    if chi.shape != (d,):
        rep.errors.append(f"char_fund has shape {chi.shape}, expected ({d},)")
        return rep
    if d == 0 or c.min() < 0 or c.max() >= d:
        rep.errors.append("cayley entries out of range")
        return rep
    try:
        e = _find_identity(c)
    except GroupError as exc:
        rep.identity_ok = False
        rep.errors.append(str(exc))
        return rep
    inv = np.full(d, -1, dtype=np.int64)
    for a in range(d):
        for b in np.flatnonzero(c[a] == e):
            if c[b, a] == e:
                inv[a] = b
                break
        if inv[a] < 0:
            rep.inverse_failures.append(a)
    ids = np.arange(d)
    ab_c = c[c[:, :, None], ids[None, None, :]]   # (a*b)*c
    a_bc = c[ids[:, None, None], c[None, :, :]]   # a*(b*c)
    for a, b, cc in zip(*np.nonzero(ab_c != a_bc)):
        rep.associativity_failures.append((int(a), int(b), int(cc)))
    if rep.inverse_failures:
        rep.errors.append("class-function check skipped: inverses missing")
        return rep
    for g, h in itertools.product(range(d), repeat=2):
        conj = c[c[h, g], inv[h]]
        if abs(chi[g] - chi[conj]) > tol:
            rep.class_function_failures.append((g, h))
    return rep


# ---------------------------------------------------------------------------
# arithmetic and permutations
# ---------------------------------------------------------------------------

def _check_index(group: FiniteGroup, *idx: int) -> None:
    for i in idx:
        if not 0 <= i < group.order:
            raise IndexError(f"element index {i} out of range for group of order {group.order}")


def multiply(group: FiniteGroup, a: int, b: int) -> int:
    _check_index(group, a, b)
    return int(group.cayley[a, b])


def inverse(group: FiniteGroup, a: int) -> int:
    _check_index(group, a)
    return int(group.inverse[a])


@dataclass(frozen=True)
class PermutationOperator:
    """Monomial operator ``|i> -> phase[i] |mapping[i]>`` on a ``dim``-level system."""

    mapping: tuple[int, ...]
    phases: tuple[complex, ...] | None = None

    def __post_init__(self):
        m = tuple(int(i) for i in self.mapping)
        if sorted(m) != list(range(len(m))):
            raise ValueError("mapping is not a bijection")
        object.__setattr__(self, "mapping", m)
        if self.phases is not None:
            if len(self.phases) != len(m):
                raise ValueError("phases length mismatch")
            if not np.allclose(np.abs(self.phases), 1.0, atol=1e-10):
                raise ValueError("phases must have unit modulus")

    @property
    def dim(self) -> int:
        return len(self.mapping)

    def matrix(self) -> np.ndarray:
        d = self.dim
        out = np.zeros((d, d), dtype=complex)
        ph = self.phases if self.phases is not None else (1.0,) * d
        for i, j in enumerate(self.mapping):
            out[j, i] = ph[i]
        return out

    def compose(self, other: "PermutationOperator") -> "PermutationOperator":
        """``self @ other`` (``other`` applied first); phases are dropped."""
        return PermutationOperator(tuple(self.mapping[other.mapping[i]] for i in range(self.dim)))

    def inverse(self) -> "PermutationOperator":
        inv = [0] * self.dim
        for i, j in enumerate(self.mapping):
            inv[j] = i
        return PermutationOperator(tuple(inv))

    def __call__(self, i: int) -> int:
        return self.mapping[i]


def right_regular(group: FiniteGroup, h: int) -> PermutationOperator:
    """theta(h): ``|g> -> |g h>``."""
    _check_index(group, h)
    return PermutationOperator(tuple(int(x) for x in group.cayley[:, h]))


def left_regular(group: FiniteGroup, h: int) -> PermutationOperator:
    """theta_L(h): ``|g> -> |h g>``."""
    _check_index(group, h)
    return PermutationOperator(tuple(int(x) for x in group.cayley[h, :]))


def conjugacy_classes(group: FiniteGroup) -> list[list[int]]:
    seen: set[int] = set()
    classes = []
    for g in range(group.order):
        if g in seen:
            continue
        cls = sorted({int(group.cayley[group.cayley[h, g], group.inverse[h]]) for h in range(group.order)})
        seen.update(cls)
        classes.append(cls)
    return classes
