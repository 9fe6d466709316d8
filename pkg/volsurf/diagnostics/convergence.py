"""
Convergence studies by consecutive-refinement differencing: the error of a
level is the norm of the difference to the next finer level (mesh or time
step) at the final time.
"""

import logging
import math
import os
from functools import partial
from multiprocessing import Pool

import numpy as np
import pandas as pd
from hurry.filesize import size

from ..config import RunConfig
from ..exceptions import ConfigError, DimensionError
from ..fem.assembly import assemble
from ..mesh.disk_mesh import quality
from ..models.entropy import SPECIES_DOMAINS
from ..models.state import StateVector
from ..simulation import Simulation, mesh_hierarchy
from .prolongation import prolong_state

log = logging.getLogger(__name__)

COLUMNS = ('h_or_tau', 'eL2_vol', 'rate', 'eL2_surf', 'rate', 'eH1_vol', 'rate', 'eH1_surf', 'rate')
ERROR_KEYS = ('eL2_vol', 'eL2_surf', 'eH1_vol', 'eH1_surf')
NORM = 'full H1 norm (L2 part plus gradient seminorm)'
# errors at or below this are round-off; their rates are absent
ERROR_FLOOR = 1e-12


def eoc(errors, floor=ERROR_FLOOR):
    """
    Experimental orders log2(e_{i-1}/e_i); NaN for the first entry and
    wherever either error is at or below floor.
    """
    rates = [float('nan')]
    for coarse, fine in zip(errors, errors[1:]):
        if coarse > floor and fine > floor:
            rates.append(math.log2(coarse / fine))
        else:
            rates.append(float('nan'))
    return rates


class EocTable(object):
    """
    Errors and rates of a convergence study, one row per level (or step
    size), each row measured against the next finer one.
    """

    def __init__(self, mode, steps, errors):
        """
        :param mode: 'h' or 'tau'
        :param steps: h or τ per row
        :param errors: dict with the lists eL2_vol, eL2_surf, eH1_vol, eH1_surf
        """
        self.mode = mode
        self.steps = [float(s) for s in steps]
        self.errors = dict((key, [float(e) for e in errors[key]]) for key in ERROR_KEYS)
        for key in ERROR_KEYS:
            if len(self.errors[key]) != len(self.steps):
                raise DimensionError("%s has %d entries for %d rows" % (key, len(self.errors[key]), len(self.steps)))
        self.rates = dict((key, eoc(self.errors[key])) for key in ERROR_KEYS)

    def __len__(self):
        return len(self.steps)

    @property
    def rows(self):
        rows = []
        for i, step in enumerate(self.steps):
            row = [step]
            for key in ERROR_KEYS:
                row += [self.errors[key][i], self.rates[key][i]]
            rows.append(row)
        return rows

    def finest_rates(self):
        return dict((key, self.rates[key][-1]) for key in ERROR_KEYS)

    def to_frame(self):
        return pd.DataFrame(self.rows, columns=list(COLUMNS))

    def write_csv(self, path):
        self.to_frame().to_csv(path, index=False, float_format='%.17g', lineterminator='\n', na_rep='')
        log.info("Wrote %s (%s)", path, size(os.path.getsize(path)))
        return path

    def to_text(self):
        cells = []
        for row in self.rows:
            line = ['%.6g' % row[0]]
            for error, rate in zip(row[1::2], row[2::2]):
                line += ['%.4e' % error, '---' if math.isnan(rate) else '%.2f' % rate]
            cells.append(line)
        return pd.DataFrame(cells, columns=list(COLUMNS)).to_string(index=False) + '\n'

    def write_text(self, path):
        with open(path, 'w') as file_:
            file_.write(self.to_text())
        log.info("Wrote %s (%s)", path, size(os.path.getsize(path)))
        return path

    def get_dict(self):
        return {'mode': self.mode, 'steps': self.steps, 'errors': self.errors, 'rates': self.rates, 'norm': NORM}


def grid_difference_norms(fine_forms, u_fine, u_coarse_prolonged):
    """
    L² and full H¹ norms of the difference of two states on the same mesh.

    :return: dict species -> (L2, H1)
    :raises DimensionError: on mismatched species or lengths
    """
    if set(u_fine.species) != set(u_coarse_prolonged.species):
        raise DimensionError("states carry different species: %s vs %s"
                             % (', '.join(u_fine.species), ', '.join(u_coarse_prolonged.species)))
    norms = {}
    for name in u_fine.species:
        domain = SPECIES_DOMAINS[name]
        d = np.asarray(u_fine[name]) - np.asarray(u_coarse_prolonged[name])
        if len(d) != fine_forms.dofs.size(domain) or len(u_fine[name]) != len(u_coarse_prolonged[name]):
            raise DimensionError("species '%s' does not live on the fine %s space" % (name, domain))
        l2 = max(float(d.dot(fine_forms.mass(domain).dot(d))), 0.0)
        semi = max(float(d.dot(fine_forms.stiffness(domain).dot(d))), 0.0)
        norms[name] = (math.sqrt(l2), math.sqrt(l2 + semi))
    return norms


def _final_values(job, config_values):
    """Final state values of one run; module level so Pool can pickle it."""
    level, tau, t_final = job
    simulation = Simulation(RunConfig(config_values), level=level, tau=tau, t_final=t_final)
    summary = simulation.run()
    return dict((name, np.array(summary.final_state[name])) for name in summary.final_state.species)


def run_jobs(config, jobs):
    """
    Final states of several runs, in job order.

    :param jobs: list of (level, tau, t_final)
    """
    processes = config.section('options')['number_of_processes']
    worker = partial(_final_values, config_values=config.config())
    if processes > 1 and len(jobs) > 1:
        log.info("Running %d simulations on %d processes", len(jobs), processes)
        pool = Pool(min(processes, len(jobs)))
        try:
            return pool.map(worker, jobs)
        finally:
            pool.close()
            pool.join()
    return [worker(job) for job in jobs]


def _require_two_species(config):
    if config.model != 'two-species':
        raise ConfigError("convergence studies are defined for the two-species model (got %s)" % config.model)


def _table(mode, steps, norms):
    errors = dict((key, []) for key in ERROR_KEYS)
    for pair in norms:
        errors['eL2_vol'].append(pair['L'][0])
        errors['eL2_surf'].append(pair['ell'][0])
        errors['eH1_vol'].append(pair['L'][1])
        errors['eH1_surf'].append(pair['ell'][1])
    return EocTable(mode, steps, errors)


def h_convergence_study(config):
    """
    Fixed τ, levels base_level .. base_level + levels; row i compares level
    base_level + i with the next finer one on the finer mesh.

    :param config: RunConfig
    :return: EocTable with convergence.levels rows
    """
    _require_two_species(config)
    section = config.section('convergence')
    base = section['base_level']
    levels = section['levels']
    hierarchy = mesh_hierarchy(config, base + levels)
    jobs = [(level, section['tau'], section['t_final']) for level in range(base, base + levels + 1)]
    finals = [StateVector(values, section['t_final']) for values in run_jobs(config, jobs)]

    steps = []
    norms = []
    coarse_forms = assemble(hierarchy[base])[1]
    for i in range(levels):
        fine_forms = assemble(hierarchy[base + i + 1])[1]
        prolonged = prolong_state(coarse_forms, fine_forms, finals[i])
        norms.append(grid_difference_norms(fine_forms, finals[i + 1], prolonged))
        steps.append(quality(hierarchy[base + i]).h)
        coarse_forms = fine_forms
    table = _table('h', steps, norms)
    log.info("h-convergence, finest rates: %s", table.finest_rates())
    return table


def tau_convergence_study(config):
    """
    Fixed mesh of level tau_level; row i compares τ_i with the next step in
    tau_list (τ_last/2 after the last one).

    :return: EocTable with one row per entry of tau_list
    """
    _require_two_species(config)
    section = config.section('convergence')
    taus = list(section['tau_list']) + [section['tau_list'][-1] / 2.0]
    level = section['tau_level']
    jobs = [(level, tau, section['t_final']) for tau in taus]
    finals = [StateVector(values, section['t_final']) for values in run_jobs(config, jobs)]

    forms = assemble(mesh_hierarchy(config, level)[-1])[1]
    norms = [grid_difference_norms(forms, finals[i + 1], finals[i]) for i in range(len(taus) - 1)]
    table = _table('tau', taus[:-1], norms)
    log.info("tau-convergence, finest rates: %s", table.finest_rates())
    return table
