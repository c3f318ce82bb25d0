"""Intrusion detection: baseline Watchdog and the selective, segment-scoped variant."""

from .base import IDS, NullIDS
from .clusters import Cluster, cluster_of, cluster_partition, cluster_qualify
from .monitor import AlarmReport, MonitorRecord, format_alarm
from .selective import (
    DEFERRED,
    Segment,
    SelectiveWatchdog,
    ThresholdState,
    build_suspect_list,
    default_ack_timeout,
    dest_ack_emit,
    fallback_segments,
    segmented_watchdog,
    update_threshold,
)
from .watchdog import Watchdog, watchdog_check_alarm, watchdog_on_entrust, watchdog_on_overhear

__all__ = [
    "IDS", "NullIDS", "Cluster", "cluster_of", "cluster_partition", "cluster_qualify",
    "AlarmReport", "MonitorRecord", "format_alarm", "DEFERRED", "Segment",
    "SelectiveWatchdog", "ThresholdState", "build_suspect_list", "default_ack_timeout", "dest_ack_emit",
    "fallback_segments", "segmented_watchdog", "update_threshold", "Watchdog",
    "watchdog_check_alarm", "watchdog_on_entrust", "watchdog_on_overhear",
]
