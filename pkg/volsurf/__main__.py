import logging
import os
import sys

import pandas as pd
import plac
from hurry.filesize import size

from volsurf.config import RunConfig
from volsurf.diagnostics.convergence import NORM, h_convergence_study, tau_convergence_study
from volsurf.diagnostics.decay import decay_study
from volsurf.diagnostics.spectral import gap_study
from volsurf.exceptions import VolSurfError
from volsurf.models.system import model_for
from volsurf.pipeline.manifest import RunManifest
from volsurf.pipeline.pipelines import CsvSeriesStorage, InvariantCheck, VtkSnapshotStorage, write_state_vtk
from volsurf.simulation import Simulation

COMMANDS = ('simulate', 'convergence', 'decay', 'gap')


def _write_frame(frame, path, log):
    frame.to_csv(path, index=False, float_format='%.17g', lineterminator='\n', na_rep='')
    log.info("Wrote %s (%s)", path, size(os.path.getsize(path)))
    return path


class VolSurfLauncher(object):
    """
    Runs one command: loads the configuration, writes the manifest, calls the
    command and finalizes the manifest with the written files and failures.
    """
    cfg = None
    log = None
    output_dir = None
    manifest = None
    files = None
    failures = None

    def __init__(self, command, config=None, output_dir=None, mode='h', quiet=False):
        self.command = command
        self.mode = mode
        self.files = []
        self.failures = []

        # logging is configured before the config is read so that config errors are reported
        logging.basicConfig(level=logging.ERROR if quiet else logging.INFO,
                            format='%(asctime)s %(name)s %(levelname)s: %(message)s')
        self.log = logging.getLogger(__name__)
        for noisy in ('meshio', 'matplotlib', 'numba'):
            logging.getLogger(noisy).setLevel(logging.ERROR)

        self.cfg = RunConfig.from_file(config) if config else RunConfig({})
        options = self.cfg.section('options')
        if not quiet:
            logging.getLogger().setLevel(str(options['log_level']).upper())
        self.output_dir = os.path.abspath(output_dir or options['output_dir'])
        if output_dir:
            self.cfg = self.cfg.with_overrides({'options': {'output_dir': output_dir}})

    def path(self, name):
        return os.path.join(self.output_dir, name)

    def run(self):
        """
        :return: exit status, 0 iff all artifacts were written and no check failed
        """
        self.manifest = RunManifest(self.output_dir, self.command, self.cfg.config())
        self.manifest.update(h1_norm=NORM)
        if self.command == 'convergence':
            self.manifest.update(mode=self.mode)
        self.manifest.start()
        try:
            getattr(self, 'cmd_' + self.command)()
        except VolSurfError as error:
            self.log.error("%s failed: %s", self.command, error)
            self.failures.append({'name': getattr(error, 'name', type(error).__name__), 'message': str(error)})
        ok = self.manifest.finalize(self.files + [self.manifest.path], self.failures)
        return 0 if ok else 1

    def cmd_simulate(self):
        simulation = Simulation(self.cfg)
        options = self.cfg.section('options')
        self.manifest.update(geometry=simulation.geometry_report(), equilibria=simulation.equilibria(),
                             operator=simulation.operator.get_dict())
        self.manifest.write()

        csv = CsvSeriesStorage(self.path('timeseries.csv'))
        snapshots = VtkSnapshotStorage(self.path('snapshots'), options['snapshot_every'], options['snapshot_times'])
        stages = [csv, snapshots]
        if options['check_invariants']:
            stages.append(InvariantCheck(options['mass_tolerance'], options['identity_tolerance'], strict=False))
        try:
            summary = simulation.run(stages)
        finally:
            self.files.append(csv.path)
            self.files.extend(snapshots.files)
        self.manifest.update(summary=summary.get_dict())
        self.failures.extend(summary.failures)

    def cmd_convergence(self):
        if self.mode == 'h':
            table = h_convergence_study(self.cfg)
        else:
            table = tau_convergence_study(self.cfg)
        self.files.append(table.write_csv(self.path('convergence.csv')))
        self.files.append(table.write_text(self.path('convergence.txt')))
        self.manifest.update(table=table.get_dict())
        print(table.to_text())

    def cmd_decay(self):
        reports, ratios, series = decay_study(self.cfg)
        frame = pd.DataFrame([report.get_dict() for report in reports])
        frame['floor_ratio'] = ratios + [float('nan')]
        self.files.append(_write_frame(frame, self.path('decay.csv'), self.log))
        for item in series:
            levels = pd.DataFrame({'t': item['t'], 'E_disc': item['E_disc'], 'E_exact': item['E_exact']})
            self.files.append(_write_frame(levels, self.path('decay_series_level%d.csv' % item['level']), self.log))
            if not item['entropy_nonincreasing']:
                self.failures.append({'name': 'entropy_monotonicity',
                                      'message': 'E_disc increased on level %d' % item['level']})
        with open(self.path('decay.txt'), 'w') as file_:
            file_.write(frame.to_string(index=False) + '\n')
        self.files.append(self.path('decay.txt'))
        self.manifest.update(decay=[report.get_dict() for report in reports], floor_ratios=ratios)
        print(frame.to_string(index=False))

    def cmd_gap(self):
        rows, forms, certificate = gap_study(self.cfg)
        self.files.append(_write_frame(pd.DataFrame(rows, columns=['level', 'h', 'c0', 'poincare_bound']),
                                       self.path('gap.csv'), self.log))
        self.files.extend(write_state_vtk(certificate, forms, self.path('gap_certificate')))
        self.manifest.update(gap=rows, certificate_mass=model_for(self.cfg.params()).total_mass(forms, certificate))
        for row in rows:
            print("level %d  h=%.6g  c0*=%.10g" % (row['level'], row['h'], row['c0']))


@plac.annotations(
    command=plac.Annotation('command to run', 'positional', None, str, COMMANDS),
    config=plac.Annotation('path to the config file', 'option', 'c'),
    output=plac.Annotation('output directory (overrides options.output_dir)', 'option', 'o'),
    mode=plac.Annotation('convergence study mode', 'option', 'm', str, ('h', 'tau')),
    quiet=plac.Annotation('log errors only', 'flag', 'q')
)
def cli(command, config=None, output=None, mode='h', quiet=False):
    "Finite element simulation and verification of volume-surface reaction-diffusion systems."
    try:
        launcher = VolSurfLauncher(command, config, output, mode, quiet)
    except VolSurfError as error:
        logging.getLogger(__name__).error("%s", error)
        sys.exit(1)
    sys.exit(launcher.run())


def main():
    plac.call(cli)


if __name__ == "__main__":
    main()
