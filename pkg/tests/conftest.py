import json
from pathlib import Path

import pytest

from overtake import ModelSpec

ROOT = Path(__file__).resolve().parents[1]
SCHEMAS = ROOT / "docs" / "schemas"

ALPHAS = (0.2, 0.5, 0.8)
K0S = (0.05, 0.25, 0.9)


@pytest.fixture
def half():
    return ModelSpec.log_cobb_douglas(0.5)


@pytest.fixture(scope="session")
def schema_validator():
    jsonschema = pytest.importorskip("jsonschema")
    from referencing import Registry, Resource

    docs = {p.name: json.loads(p.read_text()) for p in SCHEMAS.glob("*.schema.json")}
    registry = Registry().with_resources(
        (name, Resource.from_contents(doc)) for name, doc in docs.items()
    )

    def validate(instance, name):
        jsonschema.Draft202012Validator(docs[f"{name}.schema.json"], registry=registry).validate(instance)

    return validate


# -- one summary line per acceptance criterion --------------------------------

_acceptance = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py::test_ac" not in report.nodeid:
        return
    if report.when == "call" or report.failed:
        name = report.nodeid.split("::")[1].split("[")[0][len("test_"):]
        _acceptance.setdefault(name, []).append(report.passed)


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_acceptance):
        runs = _acceptance[name]
        status = "PASS" if all(runs) else "FAIL"
        detail = f" ({sum(runs)}/{len(runs)} cases)" if len(runs) > 1 else ""
        terminalreporter.write_line(f"{status}  {name}{detail}")
