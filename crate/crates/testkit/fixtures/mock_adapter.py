#!/usr/bin/env python3
"""Scripted generator adapter for protocol conformance tests.

usage: mock_adapter.py MODE [STATE_FILE]
"""
import json
import os
import sys
import time


def send(obj):
    sys.stdout.write(json.dumps(obj) + "\n")
    sys.stdout.flush()


def raw(line):
    sys.stdout.write(line + "\n")
    sys.stdout.flush()


def requests():
    for line in sys.stdin:
        line = line.strip()
        if line:
            yield json.loads(line)


def main():
    mode = sys.argv[1]
    state = sys.argv[2] if len(sys.argv) > 2 else None

    if mode == "exit-immediately":
        sys.exit(3)
    if mode == "no-ready":
        for _ in sys.stdin:
            pass
        time.sleep(60)
        return
    if mode == "response-before-ready":
        send({"id": 0, "commentary": "too early"})
    if mode == "bad-version":
        send({"type": "ready", "version": 2})
        time.sleep(60)
        return
    if mode == "diagnostics":
        raw("# loading weights")
        raw("")
        sys.stderr.write("warming up\n")
        sys.stderr.flush()
    if mode == "flaky" and not os.path.exists(state):
        open(state, "w").close()
        send({"type": "ready", "version": 1})
        for _ in requests():
            sys.exit(1)
        return

    send({"type": "ready", "version": 1, "adapter": "mock", "mode": mode})
    answered = 0
    for req in requests():
        rid, context = req["id"], req["context"]
        if mode == "silent":
            time.sleep(60)
        elif mode == "wrong-id":
            send({"id": rid + 1, "commentary": context})
        elif mode == "malformed":
            raw('{"id": %d, "commentary": ' % rid)
        elif mode == "error-object":
            send({"id": -1, "error": "cannot decode"})
        elif mode == "crash-after-1" and answered == 1:
            sys.exit(4)
        elif mode == "reverse-delay":
            time.sleep(max(0, 9 - rid) * 0.01)
            send({"id": rid, "commentary": context.upper()})
        else:
            if mode == "diagnostics":
                raw("# decoding %d" % rid)
            send({"id": rid, "commentary": context})
        answered += 1


if __name__ == "__main__":
    main()
