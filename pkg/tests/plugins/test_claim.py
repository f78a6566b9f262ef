from types import SimpleNamespace

from akcy.plugins import ClaimMonitorPlugin


def accept(plugin, t, claim):
    plugin.after_accept_step(None, SimpleNamespace(t=t), SimpleNamespace(claim_quantity=claim))


class TestClaimMonitorPlugin:
    def test_records_exceedances(self):
        plugin = ClaimMonitorPlugin(threshold=0.5)
        plugin.before_path(None)
        accept(plugin, 0.25, 0.1)
        accept(plugin, 0.5, 0.7)
        accept(plugin, 1.0, 0.5)
        assert plugin.exceedances == [(0.5, 0.7), (1.0, 0.5)]
        assert plugin.maximum == 0.7

    def test_ignores_missing_records(self):
        plugin = ClaimMonitorPlugin()
        plugin.after_accept_step(None, SimpleNamespace(t=1.0), None)
        assert plugin.maximum == 0.0

    def test_reset_between_paths(self):
        plugin = ClaimMonitorPlugin(threshold=0.5)
        accept(plugin, 1.0, 2.0)
        plugin.before_path(None)
        assert plugin.exceedances == []
        assert plugin.maximum == 0.0
