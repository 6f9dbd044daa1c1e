import json
import os
import random
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

from bowlab.algebra import parse_poly
from bowlab.diagram import all_valid_diagrams, as_diagram, random_diagram
from bowlab.envelope import envelope_table
from bowlab.fixedpoints import count_fixed_points, tie_to_bct, ties_from_labels
from bowlab.restriction import uh_space

settings.register_profile("bowlab", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("bowlab")

DATA = Path(__file__).parent / "data"

RUNNING = "/2\\2/2\\4/3/3/4\\3/2\\2\\"
EX1 = "/1\\1/2\\2\\2/"
EX2 = "/1/2/3/4/5\\2\\"
EX3 = "\\1/2/2\\2\\1/"

# BOWLAB_FUZZ=full widens the corpus to every valid diagram with <= 6 branes
# (multiplicities <= 3) plus 1000 random ones; the default keeps the suite fast.
FULL_FUZZ = os.environ.get("BOWLAB_FUZZ", "") == "full"


def fuzz_corpus():
    """Deterministic list of valid diagrams used by the corpus-wide checks."""
    if hasattr(fuzz_corpus, "cache"):
        return fuzz_corpus.cache
    exhaustive, extra = (6, 1000) if FULL_FUZZ else (5, 150)
    out = list(all_valid_diagrams(exhaustive, 3))
    seen = {str(D) for D in out}
    rng = random.Random(20261014)
    added = 0
    while added < extra:
        D = random_diagram(rng, 8, 4)
        if str(D) in seen or count_fixed_points(D) > 60:
            continue
        seen.add(str(D))
        out.append(D)
        added += 1
    fuzz_corpus.cache = out
    return out


def load_reference_tables():
    with open(DATA / "reference_tables.json") as fh:
        return json.load(fh)


def reference_table_in_lex_order(name):
    """The reference table for example `name`, reindexed to lexicographic BCT order.

    Returns (diagram, lex keys in reference order, matrix of LaurentPoly in lex order).
    """
    entry = load_reference_tables()[name]
    D = as_diagram(entry["diagram"])
    space = uh_space(D)
    keys = [tie_to_bct(ties_from_labels(D, labels)).key() for labels in entry["fixed_points"]]
    order = sorted(range(len(keys)), key=lambda k: keys[k])  # lex position -> reference index
    rows = [[parse_poly(entry["rows"][a][b], space) for b in order] for a in order]
    return D, [keys[k] for k in order], rows


_TABLES = {}


def cached_table(code, threads=1):
    key = (code, threads)
    if key not in _TABLES:
        _TABLES[key] = envelope_table(code, threads=threads)
    return _TABLES[key]


@pytest.fixture(scope="session")
def corpus():
    return fuzz_corpus()


# acceptance criteria report: test_acceptance.py records one line per criterion

ACCEPTANCE: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[n])
