import time
from contextlib import contextmanager

import pytest

_RESULTS = pytest.StashKey[dict]()


@pytest.fixture
def criterion(request, capsys):
    """``with criterion(n, title) as c:`` records one acceptance line; ``c.note`` adds detail."""
    results = request.config.stash.setdefault(_RESULTS, {})

    class Notes(list):
        def note(self, text):
            self.append(str(text))

    @contextmanager
    def run(n, title):
        notes = Notes()
        start = time.perf_counter()
        ok, err = False, ""
        try:
            yield notes
            ok = True
        except AssertionError as e:
            err = str(e).splitlines()[0] if str(e) else "assertion failed"
            raise
        finally:
            elapsed = time.perf_counter() - start
            detail = "; ".join(notes + ([err] if err else []))
            line = f"criterion {n} {'PASS' if ok else 'FAIL'} ({elapsed:.2f} s) {title}: {detail}"
            results[n] = line
            with capsys.disabled():
                print("\n" + line)

    return run


def pytest_terminal_summary(terminalreporter, config):
    results = config.stash.get(_RESULTS, {})
    if results:
        terminalreporter.section("acceptance criteria")
        for n in sorted(results):
            terminalreporter.write_line(results[n])
