def pytest_runtest_logreport(report):
    if report.when == "call" and "test_conformance" in report.nodeid:
        status = "PASS" if report.passed else ("SKIP" if report.skipped else "FAIL")
        name = report.nodeid.split("::")[-1]
        print(f"\n[EXPORTER ACCEPTANCE {status}] {name}")
