# Copyright 2026 The hpc-sentinel Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Builds a manifest document from a reproduce bundle and validates it.

Usage: bundle_manifest.py BUNDLE_DIR [--schema PATH] [--print]
"""

import argparse
import csv
import json
import pathlib
import sys

import jsonschema

DEFAULT_SCHEMA = pathlib.Path(__file__).resolve().parent.parent / "data" / "bundle_manifest.schema.json"


def _read_csv(path):
    with open(path, newline="") as f:
        return list(csv.reader(f))


def _metric(text):
    return float(text) if text else None


def build_manifest(bundle):
    bundle = pathlib.Path(bundle)
    files = sorted(p.name for p in bundle.iterdir())
    manifest = {"files": files}

    rows = _read_csv(bundle / "dataset.csv")
    manifest["dataset"] = {
        "header": rows[0],
        "rows": len(rows) - 1,
        "firmware_ids": sorted({r[0] for r in rows[1:]}),
    }

    manifest["ranking"] = json.loads((bundle / "ranking.json").read_text())

    ablation = _read_csv(bundle / "ablation.csv")
    header = ablation[0]
    manifest["ablation"] = []
    for r in ablation[1:]:
        row = dict(zip(header, r))
        for key in ("accuracy", "precision", "recall"):
            row[key] = _metric(row[key])
        manifest["ablation"].append(row)

    manifest["models"] = {
        name: json.loads((bundle / name).read_text()) for name in files if name.startswith("model_")
    }
    manifest["simulations"] = {}
    for name in files:
        if name.startswith("sim_") and name.endswith(".csv"):
            sim = _read_csv(bundle / name)
            manifest["simulations"][name] = {"header": sim[0], "rows": len(sim) - 1}

    headings = [line.lstrip("#").strip() for line in (bundle / "summary.md").read_text().splitlines()
                if line.startswith("#")]
    manifest["summary"] = {"headings": headings}
    return manifest


def validate(bundle, schema_path=DEFAULT_SCHEMA):
    schema = json.loads(pathlib.Path(schema_path).read_text())
    manifest = build_manifest(bundle)
    jsonschema.Draft202012Validator(schema).validate(manifest)
    return manifest


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("bundle")
    parser.add_argument("--schema", default=str(DEFAULT_SCHEMA))
    parser.add_argument("--print", action="store_true", help="print the manifest")
    args = parser.parse_args(argv)
    try:
        manifest = validate(args.bundle, args.schema)
    except jsonschema.ValidationError as e:
        print(f"invalid bundle: {e.message} at {list(e.absolute_path)}", file=sys.stderr)
        return 1
    if args.print:
        json.dump({k: v for k, v in manifest.items() if k != "models"}, sys.stdout, indent=2)
        print()
    print(f"{args.bundle}: valid ({len(manifest['files'])} files)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
