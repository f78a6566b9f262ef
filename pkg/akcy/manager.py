from .continuity import ContinuationPath
from .plugins import PluginCollection


class ContinuationManager:
    """
    ContinuationManager creates continuation paths and holds the options and
    plugins shared by all of them.

    :param path_cls:
        The class used for continuation paths
    :param options:
        Path options; ``record_diagnostics`` computes a
        :class:`~akcy.diagnostics.DiagnosticsRecord` per accepted step and
        ``initial_record`` also emits one for the starting point ``t = 0``
    :param plugins:
        Plugins that listen to the events of every path
    """

    def __init__(self, path_cls=ContinuationPath, options=None, plugins=None):
        if options is None:
            options = {}
        self.path_cls = path_cls
        self.options = {
            'record_diagnostics': True,
            'initial_record': True,
        }
        unknown = set(options) - set(self.options)
        if unknown:
            raise KeyError(f'unknown continuation options: {sorted(unknown)}')
        self.options.update(options)
        if plugins is None:
            self.plugins = []
        else:
            self.plugins = plugins

    @property
    def plugins(self):
        return self._plugins

    @plugins.setter
    def plugins(self, plugin_collection):
        self._plugins = PluginCollection(plugin_collection)

    def option(self, name):
        return self.options[name]

    def path(self, triple, F, config=None, **kwargs):
        return self.path_cls(self, triple, F, config, **kwargs)

    def reset(self):
        """Remove every plugin; used by tests that register plugins on the default manager."""
        self.plugins = []
