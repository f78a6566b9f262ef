import json

from pytest import raises

from akcy import __version__, runner
from akcy.cli import build_parser, main
from akcy.dump import write_field
from tests import TestCase

CONFIG = """
[grid]
n = [8, 8, 4, 4]

[outputs]
directory = "out"
ledger = false
"""


class TestParser:
    def test_suites(self):
        args = build_parser().parse_args(['check', 'run.toml', '--suite', 'hodge', '--suite', 'kernel'])
        assert args.suites == ['hodge', 'kernel']

    def test_unknown_suite(self):
        with raises(SystemExit):
            build_parser().parse_args(['check', 'run.toml', '--suite', 'everything'])

    def test_epsilons(self):
        args = build_parser().parse_args(['sweep', 'run.toml', '--eps', '1e-3, 2e-3,4e-3'])
        assert args.eps == [1e-3, 2e-3, 4e-3]

    def test_invalid_epsilons(self):
        for value in ('a,b', '', '-1e-3'):
            with raises(SystemExit):
                build_parser().parse_args(['sweep', 'run.toml', '--eps', value])

    def test_verbosity_is_exclusive(self):
        with raises(SystemExit):
            build_parser().parse_args(['-v', '-q', 'run', 'run.toml'])

    def test_version(self, capsys):
        with raises(SystemExit):
            build_parser().parse_args(['--version'])
        assert __version__ in capsys.readouterr().out


class TestMain(TestCase):
    def setup_method(self, method):
        super().setup_method(method)
        self.path = self.directory / 'run.toml'
        self.path.write_text(CONFIG)

    def test_run(self):
        assert main(['-q', 'run', str(self.path)]) == runner.EXIT_SUCCESS
        document = json.loads((self.directory / 'out' / 'report.json').read_text())
        assert document['command'] == 'run'
        assert document['config']['grid']['n'] == [8, 8, 4, 4]

    def test_check(self):
        assert main(['check', str(self.path), '--suite', 'structure']) == runner.EXIT_SUCCESS
        assert (self.directory / 'out' / 'check.json').exists()

    def test_diagnose(self):
        dump = write_field(self.directory / 'omega.dump', self.triple.omega)
        assert main(['diagnose', str(dump), str(self.path)]) == runner.EXIT_SUCCESS

    def test_diagnose_bad_dump(self):
        dump = self.directory / 'omega.dump'
        dump.write_bytes(b'{"shape": [8, 8, 4, 4, 16]}\n')
        assert main(['diagnose', str(dump), str(self.path)]) == runner.EXIT_CONFIG

    def test_unknown_key(self):
        self.path.write_text(CONFIG + '\n[solver]\ntolerance = 1e-8\n')
        assert main(['run', str(self.path)]) == runner.EXIT_CONFIG
        assert not (self.directory / 'out').exists()

    def test_missing_config(self):
        assert main(['run', str(self.directory / 'missing.toml')]) == runner.EXIT_CONFIG

    def test_invalid_thread_count(self, monkeypatch):
        monkeypatch.setenv('AKCY_THREADS', 'many')
        assert main(['run', str(self.path)]) == runner.EXIT_CONFIG
