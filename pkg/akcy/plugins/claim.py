import logging

from .base import Plugin

logger = logging.getLogger(__name__)


class ClaimMonitorPlugin(Plugin):
    """
    Watch the claim quantity along the path. Values at or above
    ``threshold`` are logged and collected in :attr:`exceedances`; the path
    itself continues.
    """

    def __init__(self, threshold=1.0):
        self.threshold = threshold
        self.exceedances = []
        self.maximum = 0.0

    def before_path(self, path):
        self.exceedances = []
        self.maximum = 0.0

    def after_accept_step(self, path, state, record):
        if record is None:
            return
        self.maximum = max(self.maximum, record.claim_quantity)
        if record.claim_quantity >= self.threshold:
            logger.warning(
                'claim quantity %.4g reached the threshold %.4g at t=%.6g',
                record.claim_quantity,
                self.threshold,
                state.t,
            )
            self.exceedances.append((state.t, record.claim_quantity))
