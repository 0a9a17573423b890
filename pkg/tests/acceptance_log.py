# criterion label -> (passed, detail); shared by test_acceptance.py and conftest.py
RESULTS = {}


def record(label, ok, detail):
    RESULTS[label] = (bool(ok), detail)
    return ok
