"""Record advisor-protocol fixtures for the browser client's parity tests.

Runs a live advisor server, replays the two canonical timelines (secretary
n=10 and dice 10/6), and writes the normalized request/response transcripts
to frontend/fixtures/. The test suite re-generates these transcripts and
compares, so a committed fixture can never drift from the server's actual
behavior.
"""

from __future__ import annotations

import json
import sys
import urllib.request
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from stoprule.server import AdvisorServer  # noqa: E402

FIXTURE_ID = "fixture-session"


def record_timeline(base: str, model: dict, observations: list[int]) -> dict:
    def call(method: str, path: str, body: dict | None = None) -> dict:
        data = json.dumps(body).encode() if body is not None else None
        request = urllib.request.Request(
            base + path, data=data, method=method,
            headers={"Content-Type": "application/json"},
        )
        with urllib.request.urlopen(request) as response:
            return json.loads(response.read())

    created = call("POST", "/session", {"schema_version": 1, "model": model})
    session_id = created["session_id"]
    steps = []
    initial = call("GET", f"/session/{session_id}/recommendation")
    for value in observations:
        ack = call("POST", f"/session/{session_id}/observe", {"value": value})
        recommendation = call("GET", f"/session/{session_id}/recommendation")
        steps.append({"observe": value, "ack": ack, "recommendation": recommendation})
    call("DELETE", f"/session/{session_id}")
    created["session_id"] = FIXTURE_ID
    return {
        "model": model,
        "created": created,
        "initial_recommendation": initial,
        "steps": steps,
    }


def build_fixtures() -> dict[str, dict]:
    server = AdvisorServer()
    server.start()
    host, port = server.address
    base = f"http://{host}:{port}"
    try:
        return {
            "secretary10": record_timeline(
                base, {"kind": "secretary", "n": 10}, [0, 0, 0, 1]
            ),
            "dice10x6": record_timeline(
                base, {"kind": "dice", "n": 10, "faces": 6}, [0, 0, 0, 0, 1, 1]
            ),
        }
    finally:
        server.stop()


def main() -> None:
    out_dir = Path(__file__).resolve().parents[1] / "frontend" / "fixtures"
    out_dir.mkdir(parents=True, exist_ok=True)
    for name, fixture in build_fixtures().items():
        path = out_dir / f"{name}.json"
        path.write_text(json.dumps(fixture, indent=2, sort_keys=True) + "\n")
        print(f"wrote {path}")


if __name__ == "__main__":
    main()
