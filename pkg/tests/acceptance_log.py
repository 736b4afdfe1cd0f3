"""Shared record of acceptance outcomes, printed by the conftest summary hook."""

RESULTS = {}


def record(key: int, title: str, ok: bool, detail: str):
    RESULTS[key] = (bool(ok), title, detail)
    assert ok, f"criterion {key} ({title}) failed: {detail}"
