"""Lexical resources and the review-to-adjective extraction pipeline.

Two file formats live here: the gloss lexicon (word<TAB>pos<TAB>gloss, one
gloss per line, pos in {a,n,v,r}) and the 6-column sentiment lexicon TSV.
On top of the gloss lexicon sits the extraction pipeline: tokenize a review,
tag tokens against the lexicon, detect adjective-noun bigrams, then keep the
adjectives that actually carry an adjective gloss.
"""
from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Sequence

log = logging.getLogger(__name__)

ADJECTIVE_TAGS = frozenset({"JJ", "JJR", "JJS"})
NOUN_TAGS = frozenset({"NN", "NNS", "NNP", "NNPS"})
OTHER_TAG = "OTHER"

# gloss-lexicon pos codes -> flag names
POS_FLAG = {"a": "adjective", "n": "noun", "v": "verb", "r": "adverb"}

_TOKEN_RE = re.compile(r"\w+|[^\w\s]", re.UNICODE)


class ParseError(ValueError):
    """A malformed line in a lexical resource file."""

    def __init__(self, message: str, path: str | Path, line_no: int):
        super().__init__(f"{path}:{line_no}: {message}")
        self.path = str(path)
        self.line_no = line_no


class NotInLexicon(KeyError):
    """Word lookup failed against a loaded lexical resource."""


@dataclass
class LexiconEntry:
    """One word with its pos-tagged glosses in original file order."""

    word: str
    glosses: list[tuple[str, str]] = field(default_factory=list)  # (pos code, text)

    @property
    def pos_flags(self) -> frozenset[str]:
        return frozenset(POS_FLAG[pos] for pos, _ in self.glosses)

    def glosses_for(self, pos: str) -> list[str]:
        return [text for p, text in self.glosses if p == pos]

    def gloss_text(self, pos: str | None = None) -> str:
        """All glosses (optionally one pos) joined with '; ' in file order."""
        texts = [text for p, text in self.glosses if pos is None or p == pos]
        return "; ".join(texts)


class Lexicon:
    """Immutable word -> LexiconEntry map."""

    def __init__(self, entries: dict[str, LexiconEntry]):
        self._entries = entries

    def __contains__(self, word: str) -> bool:
        return word in self._entries

    def __getitem__(self, word: str) -> LexiconEntry:
        try:
            return self._entries[word]
        except KeyError:
            raise NotInLexicon(word) from None

    def __len__(self) -> int:
        return len(self._entries)

    def __iter__(self) -> Iterator[str]:
        return iter(self._entries)

    def get(self, word: str) -> LexiconEntry | None:
        return self._entries.get(word)

    def words(self) -> list[str]:
        return list(self._entries)

    def adjectives(self) -> list[str]:
        return [w for w, e in self._entries.items() if "adjective" in e.pos_flags]


def tokenize(text: str, lower: bool = True) -> list[str]:
    """Split on word/punctuation boundaries; punctuation marks stand alone."""
    if lower:
        text = text.lower()
    return _TOKEN_RE.findall(text)


def parse_gloss_lexicon(path: str | Path) -> Lexicon:
    """Load a gloss lexicon file.

    Repeated words merge their glosses in file order; malformed lines raise
    ParseError with the offending line number.
    """
    entries: dict[str, LexiconEntry] = {}
    with open(path, encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line.strip():
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise ParseError(
                    f"expected 3 tab-separated fields, got {len(parts)}", path, line_no
                )
            word, pos, gloss = parts[0].strip().lower(), parts[1].strip(), parts[2].strip()
            if not word or any(ch.isspace() for ch in word):
                raise ParseError(f"bad word field {parts[0]!r}", path, line_no)
            if pos not in POS_FLAG:
                raise ParseError(
                    f"bad pos code {pos!r}: expected one of {sorted(POS_FLAG)}", path, line_no
                )
            if not gloss:
                raise ParseError("empty gloss", path, line_no)
            entry = entries.get(word)
            if entry is None:
                entries[word] = entry = LexiconEntry(word)
            entry.glosses.append((pos, gloss))
    return Lexicon(entries)


def save_gloss_lexicon(lexicon: Lexicon, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for word in lexicon:
            for pos, gloss in lexicon[word].glosses:
                fh.write(f"{word}\t{pos}\t{gloss}\n")


@dataclass(frozen=True)
class SentiSynset:
    """A scored synset: how positive/negative/neutral its member words are."""

    synset_id: str
    pos: str
    pos_score: float
    neg_score: float
    obj_score: float
    terms: tuple[str, ...]

    def __post_init__(self):
        for name, score in (
            ("pos_score", self.pos_score),
            ("neg_score", self.neg_score),
            ("obj_score", self.obj_score),
        ):
            if not 0.0 <= score <= 1.0:
                raise ValueError(f"{self.synset_id}: {name}={score} outside [0,1]")
        total = self.pos_score + self.neg_score + self.obj_score
        if abs(total - 1.0) > 1e-6:
            raise ValueError(f"{self.synset_id}: scores sum to {total}, not 1")


def parse_sentiwordnet(path: str | Path) -> list[SentiSynset]:
    """Parse the 6-column sentiment TSV (POS, ID, PosScore, NegScore, Terms, Gloss).

    The neutral score is derived as 1 - pos - neg. A record whose scores
    fall outside [0,1] or whose pos+neg exceeds 1 raises ParseError naming
    the synset id; '#' comment lines are skipped.
    """
    synsets: list[SentiSynset] = []
    with open(path, encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) < 6:
                raise ParseError(
                    f"expected 6 tab-separated columns, got {len(parts)}", path, line_no
                )
            pos, synset_id, pos_raw, neg_raw, terms_raw = (p.strip() for p in parts[:5])
            try:
                pos_score = float(pos_raw)
                neg_score = float(neg_raw)
            except ValueError:
                raise ParseError(
                    f"synset {synset_id}: non-numeric score", path, line_no
                ) from None
            if not (0.0 <= pos_score <= 1.0 and 0.0 <= neg_score <= 1.0):
                raise ParseError(
                    f"synset {synset_id}: score outside [0,1] "
                    f"(pos={pos_score}, neg={neg_score})",
                    path,
                    line_no,
                )
            if pos_score + neg_score > 1.0 + 1e-6:
                raise ParseError(
                    f"synset {synset_id}: pos+neg = {pos_score + neg_score} exceeds 1",
                    path,
                    line_no,
                )
            obj_score = max(0.0, 1.0 - pos_score - neg_score)
            terms = tuple(
                t.rsplit("#", 1)[0].lower() for t in terms_raw.split() if t
            )
            synsets.append(
                SentiSynset(
                    synset_id=synset_id,
                    pos=pos,
                    pos_score=pos_score,
                    neg_score=neg_score,
                    obj_score=obj_score,
                    terms=terms,
                )
            )
    return synsets


@dataclass(frozen=True)
class TaggedToken:
    token: str
    tag: str


@dataclass(frozen=True)
class CandidatePair:
    """An adjective immediately followed by a noun in some review."""

    adjective: str
    noun: str
    source_review_id: str = ""


def tag_tokens(tokens: Sequence[str], lexicon: Lexicon) -> list[TaggedToken]:
    """Tag tokens against the lexicon's pos flags.

    Adjective-only words get JJ, noun-only words NN. A word flagged both ways
    resolves by context: JJ when the next token is noun-flagged, NN otherwise.
    Everything else (including words missing from the lexicon) is OTHER.
    """
    flags = []
    for token in tokens:
        entry = lexicon.get(token.lower())
        flags.append(entry.pos_flags if entry is not None else frozenset())

    tagged = []
    for i, token in enumerate(tokens):
        f = flags[i]
        is_adj, is_noun = "adjective" in f, "noun" in f
        if is_adj and not is_noun:
            tag = "JJ"
        elif is_noun and not is_adj:
            tag = "NN"
        elif is_adj and is_noun:
            next_is_noun = i + 1 < len(tokens) and "noun" in flags[i + 1]
            tag = "JJ" if next_is_noun else "NN"
        else:
            tag = OTHER_TAG
        tagged.append(TaggedToken(token.lower(), tag))
    return tagged


def extract_candidate_pairs(
    tagged: Sequence[TaggedToken], source_review_id: str = ""
) -> list[CandidatePair]:
    """Collect every adjective token immediately followed by a noun token."""
    pairs = []
    for cur, nxt in zip(tagged, tagged[1:]):
        if cur.tag in ADJECTIVE_TAGS and nxt.tag in NOUN_TAGS:
            pairs.append(
                CandidatePair(cur.token.lower(), nxt.token.lower(), source_review_id)
            )
    return pairs


def validate_and_dedup(pairs: Iterable[CandidatePair], lexicon: Lexicon) -> list[str]:
    """Keep adjectives that own at least one adjective gloss; sort and dedup."""
    kept = set()
    for pair in pairs:
        entry = lexicon.get(pair.adjective)
        if entry is not None and entry.glosses_for("a"):
            kept.add(pair.adjective)
    return sorted(kept)


def extract_adjectives(corpus_path: str | Path, lexicon: Lexicon) -> list[str]:
    """Run the full pipeline over a one-review-per-line corpus file."""
    pairs: list[CandidatePair] = []
    with open(corpus_path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh):
            tokens = tokenize(line)
            if not tokens:
                continue
            tagged = tag_tokens(tokens, lexicon)
            pairs.extend(extract_candidate_pairs(tagged, str(line_no)))
    words = validate_and_dedup(pairs, lexicon)
    log.info(
        "extracted %d candidate pairs -> %d validated adjectives", len(pairs), len(words)
    )
    return words
