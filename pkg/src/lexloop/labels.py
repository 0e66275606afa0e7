"""Binary label vocabulary shared across the package.

Mental is the positive class everywhere: in training, in confusion counts
and in the annotation wire format.
"""
from __future__ import annotations

MENTAL = 1
PHYSICAL = 0

_NAMES = {MENTAL: "mental", PHYSICAL: "physical"}
_VALUES = {"mental": MENTAL, "physical": PHYSICAL}

LABEL_NAMES = ("mental", "physical")


def label_name(label: int) -> str:
    return _NAMES[label]


def parse_label(text: str) -> int:
    """Map a label string (case-insensitive) to MENTAL/PHYSICAL.

    Raises ValueError for anything outside the two-word vocabulary.
    """
    try:
        return _VALUES[text.strip().lower()]
    except KeyError:
        raise ValueError(
            f"unknown label {text!r}: expected one of {', '.join(LABEL_NAMES)}"
        ) from None


def load_label_file(path) -> dict[str, int]:
    """Read a `word<TAB>label` file (label = mental/physical or 1/0).

    Blank lines and `#` comments are skipped; later duplicates overwrite.
    """
    from .lexicon import ParseError

    labels: dict[str, int] = {}
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise ParseError(
                    f"expected word<TAB>label, got {len(parts)} fields",
                    path=str(path),
                    line_no=line_no,
                )
            word, raw = parts
            raw = raw.strip()
            if raw in ("0", "1"):
                labels[word.strip().lower()] = int(raw)
            else:
                try:
                    labels[word.strip().lower()] = parse_label(raw)
                except ValueError as exc:
                    raise ParseError(str(exc), path=str(path), line_no=line_no) from None
    return labels
