"""Independent cyclomatic complexity counter over the Python parse tree.

Counts 1 + decision points: If nodes (if and elif), For/AsyncFor/While
statements, except handlers, each extra operand of a BoolOp, IfExp nodes and
comprehension `if` filters. Comprehension `for` clauses add nothing. Nested
functions and lambdas count toward the enclosing function.

Usage: python3 cyclomatic_oracle.py corpus.py > cyclomatic_expected.json
"""
import ast
import json
import sys


def complexity(node):
    count = 1
    for sub in ast.walk(node):
        if isinstance(sub, (ast.If, ast.For, ast.AsyncFor, ast.While, ast.ExceptHandler, ast.IfExp)):
            count += 1
        elif isinstance(sub, ast.BoolOp):
            count += len(sub.values) - 1
        elif isinstance(sub, ast.comprehension):
            count += len(sub.ifs)
    return count


def main(path):
    tree = ast.parse(open(path).read())
    result = {}
    for node in tree.body:
        if isinstance(node, (ast.FunctionDef, ast.AsyncFunctionDef)):
            result[node.name] = complexity(node)
    json.dump(result, sys.stdout, indent=2, sort_keys=True)
    sys.stdout.write("\n")


if __name__ == "__main__":
    main(sys.argv[1])
