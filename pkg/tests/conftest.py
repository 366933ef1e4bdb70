import textwrap

import pytest

_CRITERIA = []

HEADER = "date,symbol,open,close,low,high,volume"

# first rows of a real GTB export
GTB_ROWS = """\
02/01/2001,GTB,4.17,4.17,4.1,4.17,1321000
03/01/2001,GTB,4.37,4.35,4,4.37,2491041
04/01/2001,GTB,4.56,4.56,4.4,4.56,2579950
05/01/2001,GTB,4.7,4.35,4.34,4.7,1118861
08/01/2001,GTB,4.4,4.25,4.25,4.5,367466
09/01/2001,GTB,4.45,4.21,4.2,4.45,1089925
10/01/2001,GTB,4.3,4.4,4.21,4.42,1468750
11/01/2001,GTB,4.52,4.57,4.5,4.59,1529660
12/01/2001,GTB,4.79,4.78,4.58,4.79,2615062
15/01/2001,GTB,5.01,5.01,5.01,5.01,942804
16/01/2001,GTB,5.26,5.12,4.86,5.26,4310481
17/01/2001,GTB,5.37,5.37,5.21,5.37,3951523
18/01/2001,GTB,5.63,5.38,5.37,5.63,1421149
19/01/2001,GTB,5.12,5.12,5.12,5.12,663687
22/01/2001,GTB,4.87,4.87,4.87,4.87,246962
23/01/2001,GTB,4.63,4.8,4.63,4.8,436621
24/01/2001,GTB,4.81,4.56,4.56,4.87,5228938
25/01/2001,GTB,4.56,4.72,4.4,4.72,1092999
"""

GTB_2000_ROWS = """\
04/05/2000,GTB,2.26,2.30,2.266,2.30,200200
05/05/2000,GTB,2.35,2.35,2.270,2.35,636701
08/05/2000,GTB,2.38,2.35,2.350,2.38,567700
09/05/2000,GTB,2.40,2.46,2.350,2.46,268500
10/05/2000,GTB,2.46,2.34,2.340,2.46,971000
"""


@pytest.fixture
def write_csv(tmp_path):
    """Write CSV text (header added unless ``header=False``) and return its path."""
    counter = iter(range(10**6))

    def _write(body, header=True, name=None):
        path = tmp_path / (name or f"prices_{next(counter)}.csv")
        text = textwrap.dedent(body)
        path.write_text((HEADER + "\n" if header else "") + text, encoding="utf-8")
        return path

    return _write


@pytest.fixture
def criterion():
    """Record an acceptance criterion outcome for the end-of-run summary."""
    def _record(name, passed, detail=""):
        _CRITERIA.append((name, bool(passed), detail))
        print(f"[{'PASS' if passed else 'FAIL'}] {name} {detail}")
        return passed

    return _record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for name, passed, detail in _CRITERIA:
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  {name}  {detail}")
