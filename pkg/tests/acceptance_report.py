"""Collects one pass/fail line per acceptance criterion for the terminal summary."""

from contextlib import contextmanager
import time

RESULTS: list[tuple[int, str, bool, str, float]] = []


class _Record:
    def __init__(self):
        self.detail = ""


@contextmanager
def criterion(number: int, title: str):
    rec = _Record()
    start = time.perf_counter()
    try:
        yield rec
    except BaseException as exc:
        detail = rec.detail or f"{type(exc).__name__}: {str(exc).splitlines()[0] if str(exc) else ''}"
        _log(number, title, False, detail, time.perf_counter() - start)
        raise
    _log(number, title, True, rec.detail, time.perf_counter() - start)


def _log(number, title, ok, detail, seconds):
    RESULTS.append((number, title, ok, detail, seconds))
    print(format_line(RESULTS[-1]))


def format_line(entry) -> str:
    number, title, ok, detail, seconds = entry
    return f"CRITERION {number} {'PASS' if ok else 'FAIL'} [{seconds:.1f}s] {title}: {detail}"
