"""Validate a report.json against schemas/report.schema.json."""
import json
import sys

import jsonschema


def main(argv):
    if len(argv) != 3:
        print("usage: validate_report.py SCHEMA REPORT", file=sys.stderr)
        return 2
    with open(argv[1]) as f:
        schema = json.load(f)
    with open(argv[2]) as f:
        report = json.load(f)
    cls = jsonschema.Draft202012Validator
    cls.check_schema(schema)
    errors = sorted(cls(schema).iter_errors(report), key=lambda e: list(e.path))
    for e in errors:
        print("/".join(map(str, e.path)) or "<root>", ":", e.message)
    if errors:
        return 1
    print("report.json is valid")
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv))
