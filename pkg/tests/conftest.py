from hypothesis import settings

# some properties load bundled resources on first use; wall-clock deadlines only add flakiness
settings.register_profile("screenrep", deadline=None, max_examples=100)
settings.load_profile("screenrep")


def pytest_terminal_summary(terminalreporter):
    import sys

    module = sys.modules.get("test_acceptance")
    lines = getattr(module, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split("criterion")[1].split(":")[0])):
            terminalreporter.write_line(line)
