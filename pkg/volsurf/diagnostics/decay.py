"""
Exponential decay fit of an entropy series with a saturation floor.
"""

import logging
import math
from functools import partial
from multiprocessing import Pool

import numpy as np

from ..config import RunConfig
from ..exceptions import FitError
from ..mesh.disk_mesh import quality
from ..pipeline.pipelines import InMemoryStorage
from ..simulation import Simulation
from .spectral import spectral_gap

log = logging.getLogger(__name__)

MIN_SAMPLES = 50
MIN_WINDOW_SAMPLES = 10
MIN_DECADES = 3.0


class DecayReport(object):
    """Result of decay_fit."""

    def __init__(self, fitted_rate, fit_window, saturation_level, spectral_gap, relative_gap_mismatch,
                 discrete_rate=None, samples=0, level=None, h=None):
        self.fitted_rate = fitted_rate
        self.fit_window = fit_window
        self.saturation_level = saturation_level
        self.spectral_gap = spectral_gap
        self.relative_gap_mismatch = relative_gap_mismatch
        self.discrete_rate = discrete_rate
        self.samples = samples
        self.level = level
        self.h = h

    def get_dict(self):
        return {
            'level': self.level,
            'h': self.h,
            'fitted_rate': self.fitted_rate,
            't_start': self.fit_window[0],
            't_end': self.fit_window[1],
            'saturation_level': self.saturation_level,
            'spectral_gap': self.spectral_gap,
            'discrete_rate': self.discrete_rate,
            'relative_gap_mismatch': self.relative_gap_mismatch,
            'samples': self.samples,
        }

    def __repr__(self):
        return ('DecayReport(rate=%.6g, window=(%g, %g), floor=%.3e, gap=%.6g, mismatch=%.3g)'
                % (self.fitted_rate, self.fit_window[0], self.fit_window[1], self.saturation_level,
                   self.spectral_gap, self.relative_gap_mismatch))


def discrete_decay_rate(spectral_gap, tau):
    """Entropy decay rate of backward Euler for the slowest mode: 2 ln(1 + τc₀*/2)/τ."""
    return 2.0 * math.log1p(0.5 * tau * spectral_gap) / tau


def decay_fit(times, entropies, spectral_gap, tau=None, floor_fraction=0.1, transient_fraction=0.05,
              window_factor=100.0):
    """
    Fit ln E = a - rate·t on the window above the saturation floor.

    The floor is the mean of the last floor_fraction of the samples; the
    window keeps samples with E > window_factor·floor after the first
    transient_fraction of the time span.

    :param spectral_gap: c₀* the fitted rate is compared with
    :param tau: step size; adds the backward Euler rate to the report
    :raises FitError: on too few samples or less than three decades above
        the floor
    """
    t = np.asarray(times, dtype=float)
    E = np.asarray(entropies, dtype=float)
    if t.shape != E.shape or t.ndim != 1:
        raise FitError("times and entropies must be 1-d arrays of equal length")
    if len(t) < MIN_SAMPLES:
        raise FitError("decay fit needs at least %d samples (got %d); run longer or sample more often"
                       % (MIN_SAMPLES, len(t)))
    if not np.all(np.isfinite(E)):
        raise FitError("entropy series contains non-finite values")

    tail = max(1, int(math.ceil(floor_fraction * len(t))))
    saturation = float(np.mean(E[-tail:]))
    if not saturation > 0.0:
        raise FitError("saturation level %.3e is not positive" % saturation)
    decades = math.log10(E.max() / saturation) if E.max() > 0.0 else 0.0
    if decades < MIN_DECADES:
        raise FitError("only %.2f decades of entropy above the saturation level %.3e; "
                       "use a longer run or a finer mesh" % (decades, saturation))

    t_cut = t[0] + transient_fraction * (t[-1] - t[0])
    window = (E > window_factor * saturation) & (t >= t_cut)
    if window.sum() < MIN_WINDOW_SAMPLES:
        raise FitError("only %d samples in the fit window above %g x the saturation level; "
                       "use a longer run or a finer mesh" % (int(window.sum()), window_factor))

    slope, _ = np.polyfit(t[window], np.log(E[window]), 1)
    rate = -float(slope)
    if not rate > 0.0:
        raise FitError("fitted entropy slope %.3e is not a decay" % slope)

    mismatch = abs(rate - spectral_gap) / spectral_gap if spectral_gap else float('nan')
    report = DecayReport(rate, (float(t[window][0]), float(t[window][-1])), saturation, spectral_gap, mismatch,
                         discrete_decay_rate(spectral_gap, tau) if tau else None, int(window.sum()))
    log.info("Decay fit: %r", report)
    return report


def floor_ratios(reports):
    """Saturation level of each report divided by that of the next finer one."""
    return [coarse.saturation_level / fine.saturation_level for coarse, fine in zip(reports, reports[1:])]


def _decay_series(level, config_values):
    """Entropy series and spectral gap of one level; module level so Pool can pickle it."""
    config = RunConfig(config_values)
    section = config.section('decay')
    simulation = Simulation(config, level=level, tau=section['tau'], t_final=section['t_final'])
    storage = InMemoryStorage()
    summary = simulation.run([storage])
    gap, _ = spectral_gap(simulation.forms, simulation.params, tolerance=config.section('gap')['tolerance'],
                          lumping=simulation.operator.lumping)
    return {
        'level': level,
        'h': quality(simulation.mesh).h,
        't': storage.series('t'),
        'E_disc': storage.series('E_disc'),
        'E_exact': storage.series('E_exact'),
        'spectral_gap': gap,
        'entropy_nonincreasing': summary.entropy_nonincreasing,
    }


def decay_study(config):
    """
    Long runs on decay.levels consecutive levels from decay.base_level, a
    decay fit of E_exact per level and the saturation floor ratios.

    :param config: RunConfig
    :return: (list of DecayReport, floor ratios, list of per-level series dicts)
    """
    section = config.section('decay')
    processes = config.section('options')['number_of_processes']
    levels = list(range(section['base_level'], section['base_level'] + section['levels']))
    worker = partial(_decay_series, config_values=config.config())
    if processes > 1 and len(levels) > 1:
        pool = Pool(min(processes, len(levels)))
        try:
            series = pool.map(worker, levels)
        finally:
            pool.close()
            pool.join()
    else:
        series = [worker(level) for level in levels]

    reports = []
    for item in series:
        if not item['entropy_nonincreasing']:
            log.warning("E_disc increased during the level %d run", item['level'])
        report = decay_fit(item['t'], item['E_exact'], item['spectral_gap'], tau=section['tau'],
                           floor_fraction=section['floor_fraction'],
                           transient_fraction=section['transient_fraction'],
                           window_factor=section['window_factor'])
        report.level = item['level']
        report.h = item['h']
        reports.append(report)
    ratios = floor_ratios(reports)
    log.info("Decay study: rates %s, floor ratios %s", ', '.join('%.4g' % r.fitted_rate for r in reports),
             ', '.join('%.3g' % r for r in ratios))
    return reports, ratios, series
