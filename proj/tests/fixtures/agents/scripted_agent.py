"""Line-protocol sandbox agent with canned behaviours, for protocol tests.

Usage: scripted_agent.py MODE WORKDIR
  pass     every requested test passes; each request line is appended to
           WORKDIR/requests.jsonl verbatim
  slow     never answers
  crash    exits on the first request
  garbage  answers with a line that is not JSON
  trace    answers trace jobs with one variable
"""
import json
import sys
import time


def main():
    mode, workdir = sys.argv[1], sys.argv[2]
    for line in sys.stdin:
        if mode == "crash":
            sys.stderr.write("agent crashed\n")
            sys.exit(3)
        if mode == "slow":
            time.sleep(3600)
        if mode == "garbage":
            print("this is not json", flush=True)
            continue
        with open(workdir + "/requests.jsonl", "a") as fh:
            fh.write(line)
        job = json.loads(line)
        if job["action"] == "trace":
            print(json.dumps({"status": "ok", "variables": [{"name": "x", "value": "3", "type": "int"}]}), flush=True)
            continue
        tests = [{"id": t, "passed": True, "failure_text": ""} for t in job["tests"]]
        print(json.dumps({"status": "ok", "tests": tests, "duration_s": 0.5}), flush=True)


if __name__ == "__main__":
    main()
