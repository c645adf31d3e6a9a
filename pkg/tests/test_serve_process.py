"""End-to-end smoke: the `serve` subcommand serves the JSON API over a socket."""
from __future__ import annotations

import json
import socket
import subprocess
import sys
import time
import urllib.request

import pytest

from conftest import CORPUS_PATH, EMBEDDINGS_PATH, POS_PATH


def _free_port() -> int:
    with socket.socket() as s:
        s.bind(("127.0.0.1", 0))
        return s.getsockname()[1]


def test_serve_subprocess_round_trip(tmp_path):
    targets = tmp_path / "targets.txt"
    targets.write_text("love\nsoul\n")
    sources = tmp_path / "sources.txt"
    sources.write_text("sugar\nsalary\nfan\n")
    inventory = tmp_path / "metaphors.jsonl"
    gen = subprocess.run(
        [
            sys.executable, "-m", "figura.cli",
            "generate",
            "--targets", str(targets),
            "--sources", str(sources),
            "--corpus", str(CORPUS_PATH),
            "--embeddings", str(EMBEDDINGS_PATH),
            "--pos-table", str(POS_PATH),
            "--out", str(inventory),
        ],
        capture_output=True,
        text=True,
    )
    assert gen.returncode == 0, gen.stderr

    port = _free_port()
    proc = subprocess.Popen(
        [
            sys.executable, "-m", "figura.cli",
            "serve",
            "--host", "127.0.0.1",
            "--port", str(port),
            "--embeddings", str(EMBEDDINGS_PATH),
            "--inventory", str(inventory),
            "--event-log", str(tmp_path / "events.jsonl"),
        ],
        stdout=subprocess.PIPE,
        stderr=subprocess.STDOUT,
        text=True,
    )
    base = f"http://127.0.0.1:{port}"
    try:
        deadline = time.time() + 30
        session_id = None
        while time.time() < deadline:
            try:
                with urllib.request.urlopen(
                    urllib.request.Request(f"{base}/session", method="POST"), timeout=2
                ) as res:
                    assert res.status == 201
                    session_id = json.loads(res.read())["session_id"]
                    break
            except Exception:
                if proc.poll() is not None:
                    pytest.fail(f"serve exited early:\n{proc.stdout.read()}")
                time.sleep(0.2)
        assert session_id, "server never came up"

        req = urllib.request.Request(
            f"{base}/session/{session_id}/message",
            data=json.dumps({"text": "i love long walks"}).encode(),
            headers={"Content-Type": "application/json"},
            method="POST",
        )
        with urllib.request.urlopen(req, timeout=5) as res:
            body = json.loads(res.read())
        assert body["triggered"] is True

        with urllib.request.urlopen(f"{base}/metrics", timeout=5) as res:
            metrics = json.loads(res.read())
        assert sum(v["delivered"] for v in metrics["forms"].values()) == 1
    finally:
        proc.terminate()
        try:
            proc.wait(timeout=10)
        except subprocess.TimeoutExpired:
            proc.kill()
