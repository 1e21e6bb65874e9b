from pathlib import Path

import pytest

from involvedstyle.tagger import PTB_MAP, FeatureTag

FIXTURES = Path(__file__).parent / "fixtures"

GOLD_EXTRA = {"AND": FeatureTag.AND_COORD, "Q": FeatureTag.QUESTION}


def _split(tok):
    head, sep, tag = tok.rpartition("/")
    if sep and (tag in PTB_MAP or tag in GOLD_EXTRA):
        return head, (PTB_MAP.get(tag) or GOLD_EXTRA[tag])
    return tok, FeatureTag.OTHER


def load_hand_tagged():
    """{section: [[(surface, gold FeatureTag), ...], ...]}"""
    sections = {}
    current = None
    for line in (FIXTURES / "hand_tagged.txt").read_text(encoding="utf-8").splitlines():
        if line.startswith("## "):
            current = line[3:].strip()
            sections[current] = []
        elif line.startswith("#") or not line.strip():
            continue
        else:
            sections[current].append([_split(t) for t in line.split(" ")])
    return sections


@pytest.fixture(scope="session")
def hand_tagged():
    return load_hand_tagged()


@pytest.fixture(scope="session")
def abstracts():
    return {
        1: (FIXTURES / "abstract1.txt").read_text(encoding="utf-8").strip(),
        2: (FIXTURES / "abstract2.txt").read_text(encoding="utf-8").strip(),
    }


# --- acceptance summary ---------------------------------------------------

_CRITERIA = {}


def pytest_runtest_logreport(report):
    props = dict(report.user_properties)
    if "criterion" not in props:
        return
    if report.when == "call" or report.failed:
        key = props["criterion"]
        if report.passed:
            _CRITERIA[key] = ("PASS", props.get("detail", ""))
        else:
            detail = props.get("detail") or str(report.longrepr).strip().splitlines()[-1]
            _CRITERIA[key] = ("FAIL", detail)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for key in sorted(_CRITERIA, key=lambda k: int(k.split()[0])):
        status, detail = _CRITERIA[key]
        terminalreporter.write_line(f"[{status}] criterion {key}: {detail}")
