from cslphoton import validation


def test_quick_suite_passes():
    checks = validation.run_suite(quick=True)
    assert len(checks) >= 15
    failed = [c.name for c in checks if not c.passed]
    assert failed == []


def test_rel():
    assert abs(validation.rel(1.1, 1.0) - 0.1) < 1e-15
    assert validation.rel(0.5, 0.0) == 0.5
