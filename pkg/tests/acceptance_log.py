"""Shared record of acceptance outcomes, printed at the end of the run."""

LINES = {}


def record(key, passed, detail="", report_only=False):
    tag = "REPORT" if report_only else ("PASS" if passed else "FAIL")
    line = f"criterion {key}: {tag} {detail}".rstrip()
    LINES[str(key)] = line
    print(line)
    return passed
