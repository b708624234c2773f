import os

from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None,
                          suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

# criterion number -> list of (passed, detail); filled by test_acceptance
ACCEPTANCE_RESULTS = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_RESULTS):
        checks = ACCEPTANCE_RESULTS[key]
        ok = all(p for p, _ in checks)
        failed = [d for p, d in checks if not p]
        detail = "; ".join(failed) if failed else f"{len(checks)} checks"
        terminalreporter.write_line(f"criterion {key:>2}: {'PASS' if ok else 'FAIL'} ({detail})")
