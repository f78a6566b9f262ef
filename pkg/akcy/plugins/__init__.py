from .base import Plugin, PluginCollection
from .claim import ClaimMonitorPlugin
from .csv_log import ConvergenceLogPlugin
from .field_dump import FieldDumpPlugin
from .ledger import LedgerPlugin
