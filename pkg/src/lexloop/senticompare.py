"""Cross-tabulation of mental/physical tags against sentiment subjectivity.

Synsets split into subjective (a positive or negative score strictly
dominates) and objective; a word is then subjective, objective, or dual
depending on which synset kinds it belongs to. The cross-tab row-normalizes
per mental/physical class.
"""
from __future__ import annotations

import json
from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable, Mapping

from .labels import MENTAL, PHYSICAL, label_name
from .lexicon import NotInLexicon, SentiSynset
from .metrics import round_half_up

SUBSYN = "subsyn"
OBJSYN = "objsyn"

SUBJECTIVE = "subjective"
OBJECTIVE = "objective"
DUAL = "dual"

SUBJECTIVITY_COLUMNS = (SUBJECTIVE, OBJECTIVE, DUAL)


def classify_synset(synset: SentiSynset) -> str:
    """SUBSYN when the subjective mass strictly dominates; ties go objective."""
    return SUBSYN if max(synset.pos_score, synset.neg_score) > synset.obj_score else OBJSYN


@dataclass(frozen=True)
class WordSubjectivity:
    word: str
    label: str
    subsyn_count: int
    objsyn_count: int


def classify_word(word: str, synsets: Iterable[SentiSynset]) -> WordSubjectivity:
    """Label a word by the synset kinds it belongs to."""
    kinds = [classify_synset(s) for s in synsets]
    if not kinds:
        raise NotInLexicon(word)
    sub = sum(1 for k in kinds if k == SUBSYN)
    obj = len(kinds) - sub
    if obj == 0:
        label = SUBJECTIVE
    elif sub == 0:
        label = OBJECTIVE
    else:
        label = DUAL
    return WordSubjectivity(word=word, label=label, subsyn_count=sub, objsyn_count=obj)


def adjective_synsets_by_word(synsets: Iterable[SentiSynset]) -> dict[str, list[SentiSynset]]:
    """Group adjective-pos synsets under each member word."""
    grouped: dict[str, list[SentiSynset]] = defaultdict(list)
    for synset in synsets:
        if synset.pos != "a":
            continue
        for term in synset.terms:
            grouped[term].append(synset)
    return dict(grouped)


def classify_words(synsets: Iterable[SentiSynset]) -> dict[str, WordSubjectivity]:
    return {
        word: classify_word(word, group)
        for word, group in adjective_synsets_by_word(synsets).items()
    }


@dataclass
class CrossTab:
    """Row-normalized mental/physical vs subjective/objective/dual table."""

    counts: dict[int, dict[str, int]]  # class -> column -> count
    excluded_without_subjectivity: int
    excluded_without_mpc_label: int

    def row_total(self, cls: int) -> int:
        return sum(self.counts[cls].values())

    def fractions(self, cls: int) -> dict[str, float]:
        total = self.row_total(cls)
        return {col: self.counts[cls][col] / total for col in SUBJECTIVITY_COLUMNS}

    def percentages(self, cls: int) -> dict[str, int]:
        return {
            col: round_half_up(100.0 * frac)
            for col, frac in self.fractions(cls).items()
        }


def cross_tab(
    mpc_labels: Mapping[str, int], subjectivity: Mapping[str, WordSubjectivity]
) -> CrossTab:
    """Cross-tabulate; words present on only one side are excluded and counted."""
    counts = {
        MENTAL: {col: 0 for col in SUBJECTIVITY_COLUMNS},
        PHYSICAL: {col: 0 for col in SUBJECTIVITY_COLUMNS},
    }
    missing_subj = 0
    for word, cls in mpc_labels.items():
        ws = subjectivity.get(word)
        if ws is None:
            missing_subj += 1
            continue
        counts[cls][ws.label] += 1
    missing_mpc = sum(1 for w in subjectivity if w not in mpc_labels)
    if all(total == 0 for total in (sum(counts[MENTAL].values()), sum(counts[PHYSICAL].values()))):
        raise ValueError("no words shared between the tag map and the sentiment lexicon")
    return CrossTab(
        counts=counts,
        excluded_without_subjectivity=missing_subj,
        excluded_without_mpc_label=missing_mpc,
    )


def render_cross_tab_table(tab: CrossTab) -> str:
    lines = ["class     subjective  objective  dual   total"]
    for cls in (MENTAL, PHYSICAL):
        total = tab.row_total(cls)
        if total == 0:
            lines.append(f"{label_name(cls):<9} {'-':>9} {'-':>10} {'-':>5}  {0:6d}")
            continue
        pct = tab.percentages(cls)
        lines.append(
            f"{label_name(cls):<9} {pct[SUBJECTIVE]:8d}%  {pct[OBJECTIVE]:8d}%  "
            f"{pct[DUAL]:3d}%  {total:6d}"
        )
    lines.append(
        f"excluded: {tab.excluded_without_subjectivity} without sentiment entry, "
        f"{tab.excluded_without_mpc_label} without mental/physical tag"
    )
    return "\n".join(lines) + "\n"


def render_cross_tab_records(tab: CrossTab) -> str:
    lines = []
    for cls in (MENTAL, PHYSICAL):
        total = tab.row_total(cls)
        row = {
            "kind": "crosstab_row",
            "class": label_name(cls),
            "total": total,
            "counts": tab.counts[cls],
        }
        if total:
            row["fractions"] = tab.fractions(cls)
            row["percentages"] = tab.percentages(cls)
        lines.append(json.dumps(row, sort_keys=True))
    lines.append(
        json.dumps(
            {
                "kind": "crosstab_excluded",
                "without_subjectivity": tab.excluded_without_subjectivity,
                "without_mpc_label": tab.excluded_without_mpc_label,
            },
            sort_keys=True,
        )
    )
    return "\n".join(lines) + "\n"
