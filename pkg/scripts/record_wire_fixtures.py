"""Capture real chat-service responses into a JSON fixture for UI tests.

Spins the HTTP app over a trained workdir with an in-process test client
(needs the `test` extra for httpx), posts a scripted conversation, and
stores the exact response bodies: the per-turn payloads and the final
trace.  The browser client's contract tests replay this file and must
render every number verbatim.
"""

import argparse
import json
from pathlib import Path

from fastapi.testclient import TestClient

from cheerbot.pipeline import load_chat_components
from cheerbot.service import create_app

# keep some corpus vocabulary in each line so the detector has a real
# signal and the recorded turns differ from one another
MESSAGES = [
    "i feel so afraid about tomorrow",
    "honestly still anxious but talking helps",
    "now it is joyful news all around",
]


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--workdir", type=Path, required=True,
                        help="workdir with all training stages complete")
    parser.add_argument("--out", type=Path,
                        default=Path("frontend/test/fixtures/recorded_session.json"))
    args = parser.parse_args(argv)

    components = load_chat_components(args.workdir)
    client = TestClient(create_app(components))

    session_id = client.post("/api/session").json()["session_id"]
    payloads = []
    for text in MESSAGES:
        r = client.post(f"/api/session/{session_id}/message", json={"text": text})
        r.raise_for_status()
        payloads.append(r.json())
    trace = client.get(f"/api/session/{session_id}/trace").json()

    fixture = {"messages": MESSAGES, "payloads": payloads, "trace": trace}
    args.out.parent.mkdir(parents=True, exist_ok=True)
    args.out.write_text(json.dumps(fixture, indent=2) + "\n", encoding="utf-8")
    print(f"recorded {len(payloads)} turns to {args.out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
