#!/usr/bin/env python3
"""Regenerate the bundled stand-in taxonomy and placeholder correlation table.

The correlation values are synthetic draws, NOT estimates from any study.
Routine categories get small effects, variable leisure categories larger
ones, so that activity mixes visibly modulate exhibited personality in
demos and tests.  Output is deterministic (fixed seed).
"""

import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from congrec.core import CorrelationMatrix
from congrec.data import Category, Taxonomy, write_correlation, write_taxonomy

ASSETS = Path(__file__).resolve().parents[1] / "src" / "congrec" / "assets"

ROUTINE = [
    ("working", "Working"),
    ("studying", "Studying"),
    ("sleeping", "Sleeping or resting"),
    ("eating", "Eating or having meals"),
    ("housework", "Housework and chores"),
    ("commuting", "Commuting or travel"),
    ("errands", "Errands and shopping"),
]
VARIABLE = [
    ("watching_tv", "Watching TV or streaming"),
    ("reading", "Reading"),
    ("exercising", "Exercising or sports"),
    ("socializing", "Socializing"),
    ("social_media", "Using social media"),
    ("listening_music", "Listening to music"),
    ("outdoor_leisure", "Outdoor leisure"),
    ("gaming", "Playing games"),
]

ITEMS = {
    "working": ["working", "in a meeting", "answering emails"],
    "studying": ["studying", "attending a lecture", "doing homework"],
    "sleeping": ["sleeping", "napping", "resting in bed"],
    "eating": ["eating", "having lunch", "having dinner", "cooking and eating"],
    "housework": ["cleaning the house", "doing laundry", "washing dishes"],
    "commuting": ["commuting", "driving", "riding the bus"],
    "errands": ["grocery shopping", "running errands", "shopping"],
    "watching_tv": ["watching TV", "watching a movie", "streaming a series"],
    "reading": ["reading a book", "reading the news", "reading a magazine"],
    "exercising": ["exercising", "running", "at the gym", "playing football"],
    "socializing": ["talking with friends", "at a party", "visiting family"],
    "social_media": ["browsing social media", "scrolling instagram", "posting online"],
    "listening_music": ["listening to music", "listening to a podcast"],
    "outdoor_leisure": ["taking a walk", "hiking", "sitting in the park"],
    "gaming": ["playing video games", "playing board games", "gaming online"],
}


def build_taxonomy() -> Taxonomy:
    cats = tuple(Category(cid, name) for cid, name in ROUTINE + VARIABLE)
    items = {raw: cid for cid, raws in ITEMS.items() for raw in raws}
    return Taxonomy(version="congrec-standin-1", categories=cats, items=items)


# Each trait row keeps one sign so activity mixes shift a trait consistently
# up or down; magnitudes stay small, as activity-trait links tend to be.
ROW_SIGNS = (1.0, -1.0, 1.0, -1.0, 1.0)  # E, A, C, N, O


def build_correlation(taxonomy: Taxonomy, seed: int = 7) -> CorrelationMatrix:
    rng = np.random.Generator(np.random.PCG64(seed))
    n_routine = len(ROUTINE)
    values = np.zeros((5, taxonomy.n))
    for t in range(5):
        for c in range(taxonomy.n):
            if c < n_routine:
                mag = rng.uniform(0.05, 0.15)
            else:
                mag = rng.uniform(0.05, 0.25)
            values[t, c] = ROW_SIGNS[t] * mag
    values = np.round(values, 3)
    return CorrelationMatrix.from_array(values, category_ids=taxonomy.ids)


def main() -> None:
    ASSETS.mkdir(parents=True, exist_ok=True)
    tax = build_taxonomy()
    write_taxonomy(ASSETS / "taxonomy.json", tax)
    C = build_correlation(tax)
    write_correlation(
        ASSETS / "correlation.csv",
        C,
        tax,
        comment=(
            "PLACEHOLDER activity-trait correlations: synthetic values drawn with a fixed seed.\n"
            "These are NOT estimates from any published study. Substitute a real table in the\n"
            "same format (header of category ids, five rows labeled E,A,C,N,O) for real use."
        ),
    )
    print(f"wrote {ASSETS / 'taxonomy.json'}")
    print(f"wrote {ASSETS / 'correlation.csv'}")


if __name__ == "__main__":
    main()
