def pytest_terminal_summary(terminalreporter):
    """Print the acceptance PASS/FAIL lines whenever the acceptance module ran."""
    mod = None
    for item in getattr(terminalreporter.config, "_acceptance_items", []):
        mod = item
    if mod is None:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.summary_lines():
        terminalreporter.write_line(line)


def pytest_collection_modifyitems(config, items):
    mods = {item.module for item in items if item.module.__name__.endswith("test_acceptance")}
    config._acceptance_items = list(mods)
