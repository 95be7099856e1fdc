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

"""End-to-end checks of the hpc-sentinel binary: exit codes, every
subcommand, and a validated reproduce bundle."""

import argparse
import csv
import filecmp
import json
import os
import pathlib
import shutil
import subprocess
import sys
import unittest

ARGS = None


def run(*argv, env=None):
    full_env = dict(os.environ)
    if env:
        full_env.update(env)
    return subprocess.run([ARGS.binary, *map(str, argv)], capture_output=True, text=True, env=full_env)


def ok(*argv, **kw):
    r = run(*argv, **kw)
    if r.returncode != 0:
        raise AssertionError(f"{argv} exited {r.returncode}: {r.stderr}")
    return r


def rows(path):
    with open(path, newline="") as f:
        return list(csv.reader(f))


class CliTest(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.work = pathlib.Path(ARGS.work).resolve()
        shutil.rmtree(cls.work, ignore_errors=True)
        cls.work.mkdir(parents=True)
        cls.data = pathlib.Path(ARGS.data).resolve()
        cls.base = cls.data / "base_firmware.asm"

    def path(self, name):
        return self.work / name

    def build_dataset(self):
        out = self.path("corpus.csv")
        if out.exists():
            return out
        ok("extract", self.base, "--label", "benign", "--out", out)
        for attack in ("mppt_dos", "inverter_dos", "input_array", "input_sine"):
            mutant = self.path(f"{attack}.asm")
            ok("mutate", "--base", self.base, "--attack", attack,
               "--template", self.data / "templates" / f"{attack}.json", "--seed", 42, "--out", mutant)
            ok("extract", mutant, "--label", "malicious", "--attack", attack, "--append", "--out", out)
        return out

    def test_exit_codes(self):
        self.assertEqual(run("--version").returncode, 0)
        self.assertEqual(run("simulate", "--help").returncode, 0)
        self.assertEqual(run("frobnicate").returncode, 2)
        self.assertEqual(run("simulate", "--out", self.path("x.csv"), "--bogus").returncode, 2)
        self.assertEqual(run("simulate", "--scenario", "blackout", "--out", self.path("x.csv")).returncode, 2)
        self.assertEqual(run("extract", self.path("missing.asm"), "--out", self.path("x.csv")).returncode, 2)
        self.assertEqual(run("extract", self.base, "--label", "malicious", "--out", self.path("x.csv")).returncode, 2)
        bad = self.path("bad.csv")
        bad.write_text("not,a,dataset\n1,2,3\n")
        self.assertEqual(run("train", "--model", "dt", "--data", bad, "--out", self.path("m.json")).returncode, 3)
        self.assertEqual(run("reproduce", "--config", self.path("nope.json")).returncode, 2)
        data = self.build_dataset()
        r = run("train", "--model", "nn", "--data", data, "--lr", "1e300", "--epochs", "50",
                "--out", self.path("diverge.json"))
        self.assertEqual(r.returncode, 4, r.stderr)
        self.assertIn("NonFiniteLoss", r.stderr)

    def test_simulate(self):
        a, b = self.path("nominal_a.csv"), self.path("nominal_b.csv")
        ok("simulate", "--scenario", "nominal", "--out", a)
        ok("simulate", "--scenario-file", self.data / "scenarios" / "nominal.json", "--out", b,
           env={"HPC_SENTINEL_THREADS": "1"})
        self.assertTrue(filecmp.cmp(a, b, shallow=False))
        table = rows(a)
        self.assertEqual(table[0], ["time_s", "freq_hz", "pv_kw", "diesel_kw", "ess_kw", "ess_kwh",
                                    "load_kw", "inverter_online", "mppt_enabled"])
        self.assertEqual(len(table), 6001)
        short = self.path("dos.csv")
        ok("simulate", "--scenario", "inverter_dos", "--duration", "20", "--out", short)
        table = rows(short)
        self.assertEqual(len(table), 2001)
        self.assertEqual(float(table[1 + 1600][2]), 0.0)
        literal = self.path("literal.csv")
        ok("simulate", "--scenario", "nominal", "--pno-variant", "literal", "--duration", "2", "--out", literal)
        self.assertNotEqual(rows(literal)[-1][2], rows(a)[200][2])
        self.assertEqual(run("simulate", "--scenario", "nominal", "--scenario-file", b, "--out", a).returncode, 2)

    def test_synth_and_mutate(self):
        synth = self.path("synth.asm")
        ok("synth-base", "--seed", 42, "--out", synth)
        self.assertTrue(filecmp.cmp(synth, self.base, shallow=False))
        first, second = self.path("m1.asm"), self.path("m2.asm")
        ok("mutate", "--base", self.base, "--attack", "input_sine", "--seed", 7, "--out", first)
        ok("mutate", "--base", self.base, "--attack", "input_sine", "--seed", 7, "--out", second)
        self.assertTrue(filecmp.cmp(first, second, shallow=False))
        self.assertFalse(filecmp.cmp(first, self.base, shallow=False))
        self.assertEqual(run("mutate", "--base", self.base, "--attack", "mppt_dos",
                             "--template", self.data / "templates" / "input_sine.json",
                             "--out", first).returncode, 2)

    def test_extract_train_eval_rank_ablate(self):
        data = self.build_dataset()
        table = rows(data)
        self.assertEqual(len(table[0]), 35)
        ids = {r[0] for r in table[1:]}
        self.assertEqual(ids, {"base_firmware", "mppt_dos", "inverter_dos", "input_array", "input_sine"})

        model = self.path("rf.json")
        ok("train", "--model", "rf", "--data", data, "--balance", "--trees", 20, "--seed", 42, "--out", model)
        again = self.path("rf2.json")
        ok("train", "--model", "rf", "--data", data, "--balance", "--trees", 20, "--seed", 42, "--out", again,
           env={"HPC_SENTINEL_THREADS": "1"})
        self.assertTrue(filecmp.cmp(model, again, shallow=False))
        self.assertEqual(json.loads(model.read_text())["kind"], "rf")

        report = self.path("eval.json")
        ok("eval", "--model", model, "--data", data, "--split", 0.7, "--seed", 42, "--out", report)
        result = json.loads(report.read_text())
        confusion = result["confusion"]
        self.assertEqual(confusion["tp"] + confusion["tn"] + confusion["fp"] + confusion["fn"],
                         confusion["total"])
        self.assertLess(confusion["total"], len(table) - 1)

        for kind in ("dt", "nn"):
            out = self.path(f"{kind}.json")
            ok("train", "--model", kind, "--data", data, "--epochs", 100, "--hidden", 4, "--out", out)
            ok("eval", "--model", out, "--data", data, "--out", self.path(f"{kind}_eval.json"))

        ranking = self.path("ranking.json")
        ok("rank", "--data", data, "--components", 3, "--out", ranking)
        entries = json.loads(ranking.read_text())["ranking"]
        self.assertEqual(len(entries), 30)
        scores = [e["score"] for e in entries]
        self.assertEqual(scores, sorted(scores, reverse=True))

        ablation = self.path("ablation.csv")
        ok("ablate", "--data", data, "--exclusions", "2", "--trees", 5, "--epochs", 50, "--out", ablation)
        table = rows(ablation)
        self.assertEqual(table[0], ["spec", "model", "accuracy", "precision", "recall"])
        self.assertEqual(len(table), 31)
        self.assertEqual(run("ablate", "--data", data, "--exclusions", "3", "--out", ablation).returncode, 2)

    def test_report(self):
        sim = self.path("report_sim.csv")
        ok("simulate", "--scenario", "input_sine", "--duration", "10", "--out", sim)
        out = self.path("svg")
        ok("report", sim, "--out-dir", out)
        svg = (out / "report_sim.svg").read_text()
        self.assertTrue(svg.startswith("<svg"))
        self.assertEqual(run("report", self.path("absent.csv"), "--out-dir", out).returncode, 3)

    def test_reproduce_bundle(self):
        sys.path.insert(0, str(pathlib.Path(__file__).resolve().parent.parent / "tools"))
        import bundle_manifest

        bundle = self.path("bundle")
        ok("reproduce", "--config", self.data / "pipeline.json", "--seed", 42, "--out", bundle, "--quiet")
        manifest = bundle_manifest.validate(bundle, self.data / "bundle_manifest.schema.json")
        self.assertEqual(len(manifest["files"]), 20)
        self.assertEqual(len(manifest["ablation"]), 45)

        serial = self.path("bundle_serial")
        ok("reproduce", "--config", self.data / "pipeline.json", "--seed", 42, "--out", serial, "--quiet",
           env={"HPC_SENTINEL_THREADS": "1"})
        match, mismatch, errors = filecmp.cmpfiles(bundle, serial, manifest["files"], shallow=False)
        self.assertEqual((mismatch, errors), ([], []))

        (bundle / "stray.txt").write_text("x")
        r = run("reproduce", "--config", self.data / "pipeline.json", "--out", bundle, "--quiet")
        self.assertEqual(r.returncode, 2)
        self.assertIn("stage 'mutate'", r.stderr)

        cfg = json.loads((self.data / "pipeline.json").read_text())
        cfg["base_firmware"] = str(self.path("no_such_base.asm"))
        for key, value in cfg["templates"].items():
            cfg["templates"][key] = str(self.data / value)
        cfg["category_map"] = str(self.data / cfg["category_map"])
        cfg["scenarios"] = ["nominal"]
        cfg["output_dir"] = str(self.path("broken"))
        broken = self.path("broken.json")
        broken.write_text(json.dumps(cfg))
        r = run("reproduce", "--config", broken, "--quiet")
        self.assertEqual(r.returncode, 3)
        self.assertIn("stage 'mutate'", r.stderr)
        self.assertIn("no_such_base.asm", r.stderr)


def main():
    global ARGS
    parser = argparse.ArgumentParser()
    parser.add_argument("--binary", required=True)
    parser.add_argument("--data", required=True)
    parser.add_argument("--work", required=True)
    ARGS, rest = parser.parse_known_args()
    unittest.main(argv=[sys.argv[0], "-v", *rest])


if __name__ == "__main__":
    main()
