"""Finite groups with canonical byte encodings.

Five kinds are supported: integers mod n under addition (``zmod``), n-bit
strings under XOR (``xor``), symmetric groups (``sym``), dihedral groups
(``dihedral``) and direct products (``prod``).  An element is represented by
its canonical byte encoding, so element equality is byte equality and
elements hash like ordinary bytes.  All group operations validate their
inputs and raise :class:`DomainError` on elements that do not belong to the
group.

The product convention for permutations is function composition: ``a * b``
applies ``b`` first, then ``a``.
"""

from __future__ import annotations

import itertools
import math
from typing import Iterator, Optional

from .errors import (
    CapacityError,
    CodecError,
    DomainError,
    GroupSpecError,
    UnsupportedKindError,
)

#: enumerate() refuses groups larger than this; callers must sample lazily.
ENUMERATION_CAP = 1 << 20

GROUP_KINDS = ("zmod", "xor", "sym", "dihedral", "prod")


class Element(bytes):
    """A group element, stored as its canonical byte encoding.

    Only meaningful relative to the GroupHandle that produced it.  Two
    elements are equal iff their payloads are byte-equal.
    """

    __slots__ = ()

    @property
    def payload(self) -> bytes:
        return bytes(self)

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return f"Element(0x{self.hex()})"


class GroupHandle:
    """Immutable description of a finite group.

    Concrete kinds subclass this and implement the codec plus the group
    law.  Handles and elements are immutable and freely shareable across
    threads; every operation is pure.
    """

    kind: str = ""

    def __init__(self) -> None:
        self.order: int = 0
        self._elements: Optional[tuple[Element, ...]] = None

    # --- group law ---------------------------------------------------

    def op(self, a: Element, b: Element) -> Element:
        raise NotImplementedError

    def inv(self, a: Element) -> Element:
        raise NotImplementedError

    def identity(self) -> Element:
        raise NotImplementedError

    # --- codec -------------------------------------------------------

    def _decode_or_none(self, raw: bytes):
        """Return the internal value for canonical bytes, else None."""
        raise NotImplementedError

    def validate(self, a: Element):
        value = self._decode_or_none(a)
        if value is None:
            raise DomainError(f"{bytes(a)!r} is not an element of {self.spec()}")
        return value

    def encode(self, a: Element) -> bytes:
        self.validate(a)
        return bytes(a)

    def decode(self, raw: bytes) -> Element:
        if self._decode_or_none(raw) is None:
            raise CodecError(f"{raw!r} is not a canonical encoding for {self.spec()}")
        return Element(raw)

    # --- friendly value interface -------------------------------------

    def element(self, value) -> Element:
        """Build an element from a natural Python value (kind specific)."""
        raise NotImplementedError

    def value(self, a: Element):
        """Inverse of element(): the natural Python value of ``a``."""
        return self.validate(a)

    def describe(self, a: Element) -> str:
        return repr(self.value(a))

    # --- sampling and enumeration -------------------------------------

    def sample(self, rng) -> Element:
        raise NotImplementedError

    def _iter_elements(self) -> Iterator[Element]:
        raise NotImplementedError

    def enumerate(self) -> tuple[Element, ...]:
        """All elements in a stable canonical order.

        Raises CapacityError above ENUMERATION_CAP.
        """
        if self.order > ENUMERATION_CAP:
            raise CapacityError(
                f"group {self.spec()} has order {self.order} > cap {ENUMERATION_CAP}"
            )
        if self._elements is None:
            self._elements = tuple(self._iter_elements())
        return self._elements

    # --- misc ----------------------------------------------------------

    def spec(self) -> str:
        raise NotImplementedError

    def __repr__(self) -> str:
        return f"<{type(self).__name__} {self.spec()} order={self.order}>"

    def __eq__(self, other) -> bool:
        return isinstance(other, GroupHandle) and self.spec() == other.spec()

    def __hash__(self) -> int:
        return hash(self.spec())


class ZmodGroup(GroupHandle):
    """Integers mod n under addition."""

    kind = "zmod"

    def __init__(self, n: int):
        super().__init__()
        if n < 2:
            raise GroupSpecError(f"zmod modulus must be >= 2, got {n}")
        self.n = n
        self.order = n
        self._width = ((n - 1).bit_length() + 7) // 8

    def _decode_or_none(self, raw):
        if not isinstance(raw, bytes) or len(raw) != self._width:
            return None
        value = int.from_bytes(raw, "big")
        return value if value < self.n else None

    def _make(self, value: int) -> Element:
        return Element(value.to_bytes(self._width, "big"))

    def element(self, value) -> Element:
        value = int(value)
        if not 0 <= value < self.n:
            raise DomainError(f"{value} out of range for {self.spec()}")
        return self._make(value)

    def op(self, a, b):
        return self._make((self.validate(a) + self.validate(b)) % self.n)

    def inv(self, a):
        return self._make(-self.validate(a) % self.n)

    def identity(self):
        return self._make(0)

    def sample(self, rng):
        # randrange rejection-samples from the next power of two internally,
        # so draws are exactly uniform.
        return self._make(rng.randrange(self.n))

    def _iter_elements(self):
        return (self._make(i) for i in range(self.n))

    def spec(self):
        return f"zmod:{self.n}"


class XorGroup(GroupHandle):
    """n-bit strings under bitwise XOR, i.e. (Z/2)^n."""

    kind = "xor"

    def __init__(self, bits: int):
        super().__init__()
        if bits < 2:
            raise GroupSpecError(f"xor bit count must be >= 2, got {bits}")
        self.bits = bits
        self.order = 1 << bits
        self._width = (bits + 7) // 8

    def _decode_or_none(self, raw):
        if not isinstance(raw, bytes) or len(raw) != self._width:
            return None
        value = int.from_bytes(raw, "big")
        return value if value < self.order else None

    def _make(self, value: int) -> Element:
        return Element(value.to_bytes(self._width, "big"))

    def element(self, value) -> Element:
        value = int(value)
        if not 0 <= value < self.order:
            raise DomainError(f"{value} out of range for {self.spec()}")
        return self._make(value)

    def op(self, a, b):
        return self._make(self.validate(a) ^ self.validate(b))

    def inv(self, a):
        self.validate(a)
        return Element(a)  # every element is its own inverse

    def identity(self):
        return self._make(0)

    def sample(self, rng):
        return self._make(rng.getrandbits(self.bits))

    def _iter_elements(self):
        return (self._make(i) for i in range(self.order))

    def spec(self):
        return f"xor:{self.bits}"


class SymGroup(GroupHandle):
    """Symmetric group on m points; elements are image tuples.

    Payload is one byte per point: byte i holds the image of point i.
    ``a * b`` is the composition "apply b, then a".
    """

    kind = "sym"

    def __init__(self, degree: int):
        super().__init__()
        if degree < 2:
            raise GroupSpecError(f"sym degree must be >= 2, got {degree}")
        if degree > 255:
            raise GroupSpecError("sym degree above 255 not representable (1 byte/point)")
        self.degree = degree
        self.order = math.factorial(degree)
        self._identity = Element(bytes(range(degree)))

    def _decode_or_none(self, raw):
        if not isinstance(raw, bytes) or len(raw) != self.degree:
            return None
        if sorted(raw) != list(range(self.degree)):
            return None
        return tuple(raw)

    def element(self, value) -> Element:
        images = tuple(int(v) for v in value)
        if sorted(images) != list(range(self.degree)):
            raise DomainError(f"{value!r} is not a permutation of 0..{self.degree - 1}")
        return Element(bytes(images))

    def op(self, a, b):
        self.validate(a)
        self.validate(b)
        return Element(bytes(a[b[i]] for i in range(self.degree)))

    def inv(self, a):
        self.validate(a)
        out = bytearray(self.degree)
        for i, image in enumerate(a):
            out[image] = i
        return Element(bytes(out))

    def identity(self):
        return self._identity

    def sample(self, rng):
        images = list(range(self.degree))
        rng.shuffle(images)  # Fisher-Yates, exactly uniform
        return Element(bytes(images))

    def _iter_elements(self):
        return (Element(bytes(p)) for p in itertools.permutations(range(self.degree)))

    def spec(self):
        return f"sym:{self.degree}"


class DihedralGroup(GroupHandle):
    """Dihedral group of order 2m: rotations r^i and reflections r^i s.

    Payload is the rotation index (fixed-width big-endian) followed by one
    reflection byte.  Multiplication uses s r = r^-1 s.
    """

    kind = "dihedral"

    def __init__(self, degree: int):
        super().__init__()
        if degree < 2:
            raise GroupSpecError(f"dihedral degree must be >= 2, got {degree}")
        self.degree = degree
        self.order = 2 * degree
        self._rot_width = ((degree - 1).bit_length() + 7) // 8

    def _decode_or_none(self, raw):
        if not isinstance(raw, bytes) or len(raw) != self._rot_width + 1:
            return None
        rot = int.from_bytes(raw[: self._rot_width], "big")
        ref = raw[-1]
        if rot >= self.degree or ref > 1:
            return None
        return (rot, ref)

    def _make(self, rot: int, ref: int) -> Element:
        return Element(rot.to_bytes(self._rot_width, "big") + bytes([ref]))

    def element(self, value) -> Element:
        rot, ref = value
        if not (0 <= int(rot) < self.degree and int(ref) in (0, 1)):
            raise DomainError(f"{value!r} invalid for {self.spec()}")
        return self._make(int(rot), int(ref))

    def op(self, a, b):
        rot_a, ref_a = self.validate(a)
        rot_b, ref_b = self.validate(b)
        rot = (rot_a + (-rot_b if ref_a else rot_b)) % self.degree
        return self._make(rot, ref_a ^ ref_b)

    def inv(self, a):
        rot, ref = self.validate(a)
        if ref:
            return Element(a)  # reflections are involutions
        return self._make(-rot % self.degree, 0)

    def identity(self):
        return self._make(0, 0)

    def sample(self, rng):
        return self._make(rng.randrange(self.degree), rng.randrange(2))

    def _iter_elements(self):
        for ref in (0, 1):
            for rot in range(self.degree):
                yield self._make(rot, ref)

    def spec(self):
        return f"dihedral:{self.degree}"


class ProductGroup(GroupHandle):
    """Direct product of two groups, componentwise operation.

    Payload is each child payload preceded by a 2-byte big-endian length.
    """

    kind = "prod"

    def __init__(self, left: GroupHandle, right: GroupHandle):
        super().__init__()
        self.left = left
        self.right = right
        self.order = left.order * right.order

    def combine(self, a: Element, b: Element) -> Element:
        """Pack one element of each factor into a product element."""
        self.left.validate(a)
        self.right.validate(b)
        return Element(
            len(a).to_bytes(2, "big") + a + len(b).to_bytes(2, "big") + b
        )

    def split(self, e: Element) -> tuple[Element, Element]:
        a, b = self.validate(e)
        return a, b

    def _decode_or_none(self, raw):
        if not isinstance(raw, bytes) or len(raw) < 4:
            return None
        len_a = int.from_bytes(raw[:2], "big")
        if len(raw) < 2 + len_a + 2:
            return None
        a = raw[2 : 2 + len_a]
        len_b = int.from_bytes(raw[2 + len_a : 4 + len_a], "big")
        b = raw[4 + len_a :]
        if len(b) != len_b:
            return None
        if self.left._decode_or_none(a) is None or self.right._decode_or_none(b) is None:
            return None
        return (Element(a), Element(b))

    def element(self, value) -> Element:
        a, b = value
        if not isinstance(a, Element):
            a = self.left.element(a)
        if not isinstance(b, Element):
            b = self.right.element(b)
        return self.combine(a, b)

    def op(self, a, b):
        a1, a2 = self.validate(a)
        b1, b2 = self.validate(b)
        return self.combine(self.left.op(a1, b1), self.right.op(a2, b2))

    def inv(self, a):
        a1, a2 = self.validate(a)
        return self.combine(self.left.inv(a1), self.right.inv(a2))

    def identity(self):
        return self.combine(self.left.identity(), self.right.identity())

    def sample(self, rng):
        return self.combine(self.left.sample(rng), self.right.sample(rng))

    def _iter_elements(self):
        for a in self.left.enumerate():
            for b in self.right.enumerate():
                yield self.combine(a, b)

    def describe(self, a):
        a1, a2 = self.validate(a)
        return f"({self.left.describe(a1)}, {self.right.describe(a2)})"

    def spec(self):
        return f"prod:({self.left.spec()},{self.right.spec()})"


# --- group spec grammar -------------------------------------------------
#
#   spec     := kind ":" params
#   kind     := "zmod" | "xor" | "sym" | "dihedral" | "prod"
#   params   := integer >= 2                      (non-prod kinds)
#             | "(" spec "," spec ")"             (prod)


def parse_group_spec(spec: str) -> GroupHandle:
    """Parse a group spec string like ``zmod:17`` or ``prod:(zmod:5,sym:3)``."""
    if not isinstance(spec, str):
        raise GroupSpecError(f"group spec must be a string, got {type(spec).__name__}")
    handle, pos = _parse_spec(spec, 0)
    rest = spec[pos:].strip()
    if rest:
        raise GroupSpecError(f"trailing input {rest!r} after group spec")
    return handle


def _parse_spec(text: str, pos: int) -> tuple[GroupHandle, int]:
    pos = _skip_ws(text, pos)
    start = pos
    while pos < len(text) and (text[pos].isalpha() or text[pos] == "_"):
        pos += 1
    kind = text[start:pos]
    if not kind:
        raise GroupSpecError(f"expected a group kind at position {start} in {text!r}")
    if kind not in GROUP_KINDS:
        raise UnsupportedKindError(f"unsupported group kind {kind!r}")
    if pos >= len(text) or text[pos] != ":":
        raise GroupSpecError(f"expected ':' after kind {kind!r} in {text!r}")
    pos += 1
    if kind == "prod":
        return _parse_prod(text, pos)
    start = pos
    while pos < len(text) and text[pos].isdigit():
        pos += 1
    token = text[start:pos]
    if not token:
        raise GroupSpecError(f"expected an integer parameter for {kind!r} in {text!r}")
    n = int(token)
    if n < 2:
        raise GroupSpecError(f"parameter for {kind!r} must be >= 2, got {token!r}")
    if kind == "zmod":
        return ZmodGroup(n), pos
    if kind == "xor":
        return XorGroup(n), pos
    if kind == "sym":
        return SymGroup(n), pos
    return DihedralGroup(n), pos


def _parse_prod(text: str, pos: int) -> tuple[GroupHandle, int]:
    pos = _skip_ws(text, pos)
    if pos >= len(text) or text[pos] != "(":
        raise GroupSpecError(f"expected '(' after 'prod:' in {text!r}")
    left, pos = _parse_spec(text, pos + 1)
    pos = _skip_ws(text, pos)
    if pos >= len(text) or text[pos] != ",":
        raise GroupSpecError(f"expected ',' between prod factors in {text!r}")
    right, pos = _parse_spec(text, pos + 1)
    pos = _skip_ws(text, pos)
    if pos >= len(text) or text[pos] != ")":
        raise GroupSpecError(f"expected ')' closing prod in {text!r}")
    return ProductGroup(left, right), pos + 1


def _skip_ws(text: str, pos: int) -> int:
    while pos < len(text) and text[pos].isspace():
        pos += 1
    return pos


def sample_distinct(group: GroupHandle, count: int, rng) -> list[Element]:
    """``count`` distinct uniform elements (uniform over distinct tuples)."""
    if count > group.order:
        raise CapacityError(f"cannot draw {count} distinct elements from {group.spec()}")
    seen: set[Element] = set()
    out: list[Element] = []
    while len(out) < count:
        e = group.sample(rng)
        if e not in seen:
            seen.add(e)
            out.append(e)
    return out
