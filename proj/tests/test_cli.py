"""End-to-end checks of the cxc command line tool.

Usage: test_cli.py <path to cxc> <source dir>
"""

import csv
import io
import json
import os
import subprocess
import sys
import tempfile
import unittest

import jsonschema

CXC = None
ROOT = None


def run(*args):
    return subprocess.run([CXC, *args], capture_output=True, text=True, timeout=300)


def data(rel):
    return os.path.join(ROOT, "data", rel)


class CliTest(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        with open(os.path.join(ROOT, "schemas", "report_v1.schema.json")) as f:
            cls.schema = json.load(f)

    def report(self, *args):
        r = run(*args)
        self.assertEqual(r.returncode, 0, r.stderr)
        doc = json.loads(r.stdout)
        jsonschema.validate(doc, self.schema)
        return doc

    def test_axioms_circle(self):
        doc = self.report("axioms", "--system", "circle:d=2,arcs=4", "--depth", "8")
        self.assertEqual(doc["kind"], "axioms")
        self.assertEqual(doc["axioms"]["expansion"]["verdict"], "PASS")
        self.assertEqual(doc["axioms"]["irreducibility"]["verdict"], "PASS")

    def test_measure_barycentric(self):
        doc = self.report("measure", "--system", "barycentric", "--depth", "5")
        self.assertTrue(doc["pushforward_exact"])

    def test_every_kind_matches_the_schema(self):
        self.report("build", "--system", "fullshift:d=2", "--depth", "5")
        self.report("export-graph", "--system", "circle:d=2,arcs=4", "--depth", "3")
        self.report("hyperbolicity", "--system", "circle:d=2,arcs=4", "--depth", "5")
        self.report("equidistribute", "--system", "circle:d=2,arcs=4", "--depth", "7", "--periodic", "5")
        self.report("modulus", "--problem", "builtin:ring:2x4")
        self.report("modulus", "--problem", data("modulus/path_5.json"), "--family", "t")
        self.report("modulus", "--system", "squaregrid", "--annulus", "band", "--n1", "2", "--n2", "3")
        self.report("homnorm", "--matrix", "3,0;0,4")
        self.report("homnorm", "--matrix", "2,0,0;0,2,0;0,0,4", "--group", "heisenberg", "--samples", "500")

    def test_schema_rejects_a_broken_report(self):
        doc = self.report("build", "--system", "fullshift:d=2", "--depth", "3")
        del doc["sphere_sizes"]
        with self.assertRaises(jsonschema.ValidationError):
            jsonschema.validate(doc, self.schema)

    def test_disconnected_annulus_has_no_chain(self):
        r = run("modulus", "--problem", data("modulus/ring_disconnected.json"))
        self.assertEqual(r.returncode, 3)
        self.assertIn("no transversal chain", r.stderr)
        self.assertEqual(r.stdout, "")

    def test_validation_errors_exit_2(self):
        cases = [
            ("build", "--system", data("systems/bad_degree.json"), "--depth", "3"),
            ("build", "--system", "circle:d=1,arcs=4", "--depth", "3"),
            ("build", "--system", "circle:d=2,arcs=4", "--depth", "0"),
            ("homnorm", "--matrix", "0.5,0;0,3"),
            ("build", "--system", "circle:d=2,arcs=4", "--depth", "3", "--format", "xml"),
            ("no-such-command",),
        ]
        for args in cases:
            with self.subTest(args=args):
                r = run(*args)
                self.assertEqual(r.returncode, 2, r.stderr)
                self.assertTrue(r.stderr.strip())

    def test_missing_file_is_io(self):
        r = run("build", "--system", "/nonexistent/spec.json", "--depth", "3")
        self.assertEqual(r.returncode, 1)

    def test_dry_run_budget(self):
        r = run("build", "--system", "barycentric", "--depth", "12", "--dry-run")
        self.assertEqual(r.returncode, 3)
        self.assertIn("budget", r.stderr)
        r = run("build", "--system", "barycentric", "--depth", "3", "--dry-run")
        self.assertEqual(r.returncode, 0, r.stderr)

    def test_repeated_runs_are_byte_identical(self):
        for args in [
            ("build", "--system", "barycentric", "--depth", "4"),
            ("hyperbolicity", "--system", "circle:d=2,arcs=4", "--depth", "6", "--mode", "sampled", "--seed", "3"),
            ("homnorm", "--matrix", "2,1;0,2", "--seed", "11"),
        ]:
            with self.subTest(args=args):
                a, b = run(*args), run(*args)
                self.assertEqual(a.returncode, 0, a.stderr)
                self.assertEqual(a.stdout, b.stdout)

    def test_csv_series(self):
        r = run("build", "--system", "barycentric", "--depth", "4", "--format", "csv")
        self.assertEqual(r.returncode, 0, r.stderr)
        rows = list(csv.DictReader(io.StringIO(r.stdout)))
        self.assertEqual(list(rows[0].keys()), ["n", "size"])
        self.assertEqual([int(x["size"]) for x in rows], [1, 12, 32, 152, 872])

    def test_out_file_matches_stdout(self):
        args = ["build", "--system", "fullshift:d=3", "--depth", "4"]
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "report.json")
            r = run(*args, "--out", path)
            self.assertEqual(r.returncode, 0, r.stderr)
            with open(path) as f:
                self.assertEqual(f.read(), run(*args).stdout)


if __name__ == "__main__":
    CXC, ROOT = sys.argv[1], sys.argv[2]
    unittest.main(argv=[sys.argv[0], "-v"])
