"""Engineered Likert score fixtures.

Each model's criterion sums are fixed over 10 ratings (5 questions x 2
versions) so the aggregate means land on the published two-decimal values
exactly; see the sums tables.  ``spread`` decomposes a sum into ten 1..5
integers deterministically.
"""

from __future__ import annotations

import io
import csv

from greekrag.scoring import SCORE_COLUMNS

QUESTIONS = (1, 2, 3, 4, 5)
VERSIONS = (1, 2)

# model -> (accuracy, completeness, clarity) sums over the 10 ratings.
# Totals /30 give the overall means 3.60, 3.63, 3.70, 4.10, 4.13, 3.77.
FAMILY_SUMS = {
    1: (40, 32, 36),
    2: (40, 33, 36),
    3: (41, 34, 36),
    4: (42, 39, 42),   # accuracy ties clarity at 4.20; completeness 3.90
    5: (44, 37, 43),   # 4.40 / 3.70 / 4.30 -> overall 4.1333...
    6: (39, 36, 38),
}

# Sports-medicine panels: clarity strongest everywhere at K=20 (model 2 on
# top overall at 3.03); at K=50 model 6 dominates (overall 4.00) with
# accuracy 4.50 its strongest criterion.
SPORTS_SUMS = {
    20: {
        1: (30, 24, 32),
        2: (31, 26, 34),
        3: (24, 20, 31),
        4: (25, 21, 34),
        5: (26, 27, 35),
        6: (29, 22, 33),
    },
    50: {
        1: (37, 31, 39),
        2: (29, 28, 42),
        3: (36, 29, 40),
        4: (34, 27, 43),
        5: (22, 28, 45),
        6: (45, 31, 44),
    },
}

FAMILY_OVERALL_2DP = ["3.60", "3.63", "3.70", "4.10", "4.13", "3.77"]


def spread(total: int, slots: int = 10) -> list[int]:
    """Ten integers in 1..5 summing to ``total``, largest first."""
    base, rem = divmod(total, slots)
    values = [base + 1] * rem + [base] * (slots - rem)
    assert all(1 <= v <= 5 for v in values) and sum(values) == total
    return values


def score_rows(domain: str, top_k: int, sums_by_model: dict[int, tuple[int, int, int]]) -> list[list]:
    rows = []
    for model_id, (acc_sum, comp_sum, clar_sum) in sorted(sums_by_model.items()):
        acc, comp, clar = spread(acc_sum), spread(comp_sum), spread(clar_sum)
        slot = 0
        for question_id in QUESTIONS:
            for version in VERSIONS:
                rows.append([domain, model_id, top_k, question_id, version,
                             acc[slot], comp[slot], clar[slot]])
                slot += 1
    return rows


def scores_csv(rows: list[list]) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(SCORE_COLUMNS)
    writer.writerows(rows)
    return out.getvalue()


def family_psychology_csv() -> str:
    return scores_csv(score_rows("family-psychology", 20, FAMILY_SUMS))


def sports_medicine_csv() -> str:
    rows = score_rows("sports-medicine", 20, SPORTS_SUMS[20])
    rows += score_rows("sports-medicine", 50, SPORTS_SUMS[50])
    return scores_csv(rows)
