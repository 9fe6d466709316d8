"""
The run manifest: written when a command starts, finalized when it ends.
"""

import datetime
import json
import logging
import os
import platform

import numpy as np
import scipy
from hurry.filesize import size


def _utc_now():
    return datetime.datetime.now(datetime.timezone.utc).isoformat()


def _jsonable(value):
    if isinstance(value, dict):
        return dict((str(k), _jsonable(v)) for k, v in value.items())
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return _jsonable(value.tolist())
    if isinstance(value, float) and value != value:
        return None
    return value


class RunManifest(object):
    """
    Config echo, geometry, equilibria, versions, timestamps and the inventory
    of written files of one command.
    """

    def __init__(self, directory, command, config):
        from .. import __version__

        self.log = logging.getLogger(__name__)
        self.path = os.path.join(directory, 'manifest.json')
        self.directory = directory
        self.data = {
            'command': command,
            'status': 'running',
            'config': config,
            'versions': {'volsurf': __version__, 'numpy': np.__version__, 'scipy': scipy.__version__,
                         'python': platform.python_version()},
            'started': _utc_now(),
            'finished': None,
            'failures': [],
            'files': [],
        }

    def update(self, **values):
        self.data.update(_jsonable(values))
        return self

    def write(self):
        if not os.path.exists(self.directory):
            os.makedirs(self.directory)
        with open(self.path, 'w') as file_:
            json.dump(_jsonable(self.data), file_, indent=2, sort_keys=True)
            file_.write('\n')
        return self.path

    def start(self):
        path = self.write()
        self.log.debug("Manifest started at %s", path)
        return path

    def finalize(self, files, failures=()):
        """
        Record the written files with their sizes and the final status.

        :return: True when the command succeeded
        """
        inventory = []
        missing = []
        for path in files:
            if os.path.exists(path):
                inventory.append({'path': os.path.relpath(path, self.directory), 'bytes': os.path.getsize(path)})
            else:
                missing.append(path)
        failures = list(failures)
        for path in missing:
            failures.append({'name': 'missing_output', 'message': '%s was not written' % path})
        self.data['files'] = inventory
        self.data['failures'] = _jsonable(failures)
        self.data['status'] = 'failed' if failures else 'ok'
        self.data['finished'] = _utc_now()
        self.write()
        self.log.info("Manifest %s: %s, %d files (%s)", self.path, self.data['status'], len(inventory),
                      size(sum(f['bytes'] for f in inventory)))
        return not failures
