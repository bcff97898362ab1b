"""Influx

This module provides pushing of match summaries to an InfluxDB instance.
Nothing is sent unless a password is configured.
"""

import os
import logging

from dateutil.parser import parse
from influxdb import InfluxDBClient

log = logging.getLogger(__name__)


def add_arguments(parser):

    parser.add_argument('--influxHost', dest="influx_host", type=str, nargs='?',
                        default=os.getenv("INFLUXDB_HOST", "localhost"),
                        help="InfluxDB URL for run summaries")
    parser.add_argument('--influxPort', dest="influx_port", type=int, nargs='?',
                        default=int(os.getenv("INFLUXDB_PORT", 8086)),
                        help="InfluxDB port")
    parser.add_argument('--influxUser', dest="influx_user", type=str, nargs='?',
                        default=os.getenv("INFLUXDB_USER", "gridlag"),
                        help="InfluxDB username")
    parser.add_argument('--influxPass', dest="influx_pass", type=str, nargs='?',
                        default=os.getenv("INFLUXDB_PASSWORD", ''),
                        help="InfluxDB password")
    parser.add_argument('--influxDB', dest="influx_db", type=str, nargs='?',
                        default=os.getenv("INFLUXDB_DB", "gridlag"),
                        help="InfluxDB database")


class Influx():

    def __init__(self, host, port, db, user, pass_):

        self.host = host
        self.port = port
        self.db = db
        self.user = user
        self.pass_ = pass_

    @classmethod
    def from_args(cls, args):
        return cls(args.influx_host, args.influx_port, args.influx_db,
                   args.influx_user, args.influx_pass)

    def points(self, scenario, starttime, endtime, summary):
        """Build the points for one run; wall-clock times come in as ISO strings."""
        completed_ts = int(parse(endtime).timestamp() * 1000000000)
        duration = completed_ts - int(parse(starttime).timestamp() * 1000000000)

        values = [("duration", duration),
                  ("ticks", int(summary['ticks'])),
                  ("predicted_ticks", int(summary['predicted_ticks'])),
                  ("error_mean", float(summary['error_mean']))]
        return [{
            "measurement": "match_completed",
            "time": completed_ts,
            "tags": {"scenario": scenario, "type": name},
            "fields": {"value": value}
        } for name, value in values]

    def log(self, scenario, starttime, endtime, summary):
        """Write a run summary; returns False when no password is configured."""
        if not self.pass_:
            return False

        client = InfluxDBClient(self.host, self.port, self.user, self.pass_, self.db)
        client.write_points(self.points(scenario, starttime, endtime, summary))
        log.debug('pushed summary of "%s" to %s:%s/%s', scenario, self.host, self.port, self.db)
        return True
