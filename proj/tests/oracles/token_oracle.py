"""Token stream of a Python file from the standard tokenize module.

One line per token: KIND LINE COL TEXT. TEXT is JSON-escaped and is left
empty for layout tokens (NEWLINE, NL, INDENT, DEDENT, ENDMARKER).

Usage: python3 token_oracle.py source.py > source.tokens
"""
import json
import sys
import tokenize

LAYOUT = {"NEWLINE", "NL", "INDENT", "DEDENT", "ENDMARKER"}


def main(path):
    with open(path, "rb") as fh:
        for tok in tokenize.tokenize(fh.readline):
            kind = tokenize.tok_name[tok.type]
            if kind == "ENCODING":
                continue
            text = "" if kind in LAYOUT else tok.string
            print(kind, tok.start[0], tok.start[1], json.dumps(text))


if __name__ == "__main__":
    main(sys.argv[1])
