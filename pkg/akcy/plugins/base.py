from collections.abc import MutableSequence


class Plugin:
    """
    Listener for the events of a :class:`~akcy.continuity.ContinuationPath`.

    Every hook is a no-op here; subclasses override the ones they need.
    """

    def before_path(self, path):
        pass

    def after_path(self, path, state, records):
        pass

    def before_step(self, path, state, t):
        pass

    def after_newton_iteration(self, path, t, iteration, residual, step_length):
        pass

    def after_accept_step(self, path, state, record):
        pass

    def after_reject_step(self, path, state, t, error):
        pass


HOOKS = frozenset(
    name for name in vars(Plugin) if name.startswith(('before_', 'after_'))
)


class PluginCollection(MutableSequence):
    """
    Ordered plugins of a manager. Calling a hook name on the collection
    calls it on every plugin in order and returns the list of results.
    """

    def __init__(self, plugins=None):
        if isinstance(plugins, PluginCollection):
            self.plugins = plugins.plugins
        else:
            self.plugins = list(plugins or ())

    def __getitem__(self, index):
        return self.plugins[index]

    def __setitem__(self, index, plugin):
        self.plugins[index] = plugin

    def __delitem__(self, index):
        del self.plugins[index]

    def __len__(self):
        return len(self.plugins)

    def insert(self, index, plugin):
        self.plugins.insert(index, plugin)

    def __repr__(self):
        return f'<{type(self).__name__} [{", ".join(map(repr, self.plugins))}]>'

    def __getattr__(self, hook):
        if hook not in HOOKS:
            raise AttributeError(f'{type(self).__name__} has no hook {hook!r}')

        def dispatch(*args, **kwargs):
            return [getattr(plugin, hook)(*args, **kwargs) for plugin in self.plugins]

        return dispatch
