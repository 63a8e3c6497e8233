"""Character alphabet and phrase cleaning.

The decoder works over a fixed 31-symbol alphabet: the 26 lowercase
letters, space, enter, period and apostrophe, plus one reserved padding
symbol used only when batching windows.  Enter is represented as "\\n"
inside phrase strings so phrases stay ordinary Python strings.
"""

from __future__ import annotations

import re

LETTERS = "abcdefghijklmnopqrstuvwxyz"
SPACE = " "
ENTER = "\n"
PERIOD = "."
APOSTROPHE = "'"
PAD = "\x00"


class PhraseError(ValueError):
    """Raised when a phrase is empty or contains illegal symbols."""


class CharacterDictionary:
    """Bijection between the 31 symbols and indices 0..30.

    Index layout: letters a-z at 0..25, space 26, enter 27, period 28,
    apostrophe 29 and the padding symbol at 30.  The padding symbol never
    appears in phrase text; it only pads label windows.
    """

    def __init__(self) -> None:
        self.symbols: tuple[str, ...] = tuple(LETTERS) + (SPACE, ENTER, PERIOD, APOSTROPHE, PAD)
        self._index = {s: i for i, s in enumerate(self.symbols)}
        if len(self._index) != len(self.symbols):
            raise AssertionError("duplicate symbols in dictionary")

    @property
    def size(self) -> int:
        return len(self.symbols)

    @property
    def pad_index(self) -> int:
        return self._index[PAD]

    @property
    def typeable(self) -> tuple[str, ...]:
        """The 30 symbols a user can actually type (everything but padding)."""
        return self.symbols[:-1]

    def index_of(self, symbol: str) -> int:
        try:
            return self._index[symbol]
        except KeyError:
            raise PhraseError(f"symbol {symbol!r} is not in the dictionary") from None

    def symbol_at(self, index: int) -> str:
        if not 0 <= index < len(self.symbols):
            raise IndexError(f"symbol index {index} out of range 0..{len(self.symbols) - 1}")
        return self.symbols[index]

    def encode(self, phrase: str) -> list[int]:
        return [self.index_of(c) for c in phrase]

    def decode(self, indices) -> str:
        return "".join(self.symbol_at(int(i)) for i in indices)


DICTIONARY = CharacterDictionary()

_KEEP = set(LETTERS) | {SPACE, PERIOD, APOSTROPHE}
_WS = re.compile(r"\s+")


def _clean(raw: str) -> str:
    text = _WS.sub(" ", raw.lower())
    text = "".join(c for c in text if c in _KEEP)
    text = _WS.sub(" ", text).strip()
    if not text:
        raise PhraseError(f"phrase is empty after cleaning: {raw!r}")
    return text


def preprocess_phrase(raw: str, second: str | None = None) -> str:
    """Normalize raw text to dictionary symbols.

    Lowercases, drops every character outside the alphabet, and collapses
    whitespace runs to single spaces.  When ``second`` is given the two
    cleaned sentences are joined with the enter symbol.  Raises
    :class:`PhraseError` when a sentence cleans down to nothing.
    """
    if second is None:
        return _clean(raw)
    return _clean(raw) + ENTER + _clean(second)
