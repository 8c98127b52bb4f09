"""Signatures of finitary polynomial functors.

A signature lists operation symbols with their arities; its polynomial
functor sends a set X to the disjoint union of X^n over all n-ary symbols.
The strict variant carries one extra nullary symbol ``bot``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

BOTTOM = "bot"


class SignatureError(ValueError):
    pass


@dataclass(frozen=True)
class Signature:
    ops: tuple[tuple[str, int], ...]
    _arity: dict[str, int] = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        arity = {}
        for symbol, n in self.ops:
            if not isinstance(n, int) or n < 0:
                raise SignatureError(f"bad arity {n!r} for {symbol!r}")
            if symbol in arity:
                raise SignatureError(f"duplicate symbol {symbol!r}")
            arity[symbol] = n
        if BOTTOM in arity and not self.is_strict:
            raise SignatureError(f"{BOTTOM!r} is reserved")
        object.__setattr__(self, "_arity", arity)

    @property
    def is_strict(self) -> bool:
        return False

    @property
    def symbols(self) -> tuple[str, ...]:
        return tuple(s for s, _ in self.ops)

    def arity(self, symbol: str) -> int:
        try:
            return self._arity[symbol]
        except KeyError:
            raise SignatureError(f"unknown symbol {symbol!r}") from None

    def __contains__(self, symbol: str) -> bool:
        return symbol in self._arity

    def __len__(self) -> int:
        return len(self.ops)

    def __iter__(self):
        return iter(self.ops)

    def nullary(self) -> tuple[str, ...]:
        return tuple(s for s, n in self.ops if n == 0)

    def base_signature(self) -> Signature:
        return self

    def __str__(self):
        return "{" + ", ".join(f"{s}/{n}" for s, n in self.ops) + "}"


@dataclass(frozen=True)
class StrictSignature(Signature):
    """A signature extended by the reserved nullary symbol ``bot``."""

    base: Signature | None = None

    def __post_init__(self):
        if self.base is None:
            raise SignatureError("strict signature needs a base")
        if self.ops != self.base.ops + ((BOTTOM, 0),):
            raise SignatureError(f"{BOTTOM!r} must be the last symbol, arity 0")
        super().__post_init__()

    @property
    def is_strict(self) -> bool:
        return True

    def base_signature(self) -> Signature:
        return self.base


def make_signature(decls: Iterable[tuple[str, int]]) -> Signature:
    return Signature(tuple((str(s), n) for s, n in decls))


def add_bottom(sig: Signature) -> StrictSignature:
    if sig.is_strict:
        raise SignatureError("signature is already strict")
    return StrictSignature(sig.ops + ((BOTTOM, 0),), base=sig)


def strict(sig: Signature) -> StrictSignature:
    """`sig` itself if strict, otherwise ``add_bottom(sig)``."""
    return sig if sig.is_strict else add_bottom(sig)
