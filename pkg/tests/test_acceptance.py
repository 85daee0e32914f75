# tests/test_acceptance.py

import xml.etree.ElementTree as ET

from ptkdv.core.errors import DomainError
from ptkdv.services import acceptance
from ptkdv.services.acceptance import AcceptanceCheck, CheckResult


def test_every_group_is_covered():
    checks = acceptance.registered_checks()
    assert {c.group for c in checks} == {"specfun", "model", "charges", "evolve", "waves"}
    names = [c.name for c in checks]
    assert len(names) == len(set(names))


def test_filter_selects_by_name():
    results = acceptance.run_checks("dn_identity")
    assert [r.name for r in results] == ["dn_identity"]
    assert results[0].passed
    assert results[0].seconds > 0
    assert acceptance.run_checks("no_such_check") == []


def test_errors_are_reported_not_raised(monkeypatch):
    def broken(options):
        raise DomainError("bad parameter")

    monkeypatch.setattr(acceptance, "_REGISTRY", [AcceptanceCheck("broken", "model", broken)])
    (result,) = acceptance.run_checks()
    assert not result.passed
    assert result.error == "DomainError: bad parameter"


def test_junit_report(tmp_path):
    results = [
        CheckResult("ok", "specfun", True, "fine", seconds=0.5),
        CheckResult("bad", "waves", False, "coverage 0.5", seconds=1.0),
        CheckResult("crash", "evolve", False, error="ConvergenceError: no"),
    ]
    path = acceptance.write_junit(results, tmp_path / "report.xml")
    suite = ET.parse(path).getroot()

    assert suite.get("tests") == "3"
    assert suite.get("failures") == "1"
    assert suite.get("errors") == "1"
    cases = {case.get("name"): case for case in suite.iter("testcase")}
    assert cases["ok"].get("classname") == "ptkdv.specfun"
    assert cases["bad"].find("failure").get("message") == "coverage 0.5"
    assert cases["crash"].find("error") is not None
