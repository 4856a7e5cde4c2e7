"""
Experiment Service
Runs campaigns of random drops through the optimizer, sweeps parameters
and records per-drop outcomes, aggregates and report files.
"""
from concurrent.futures import ThreadPoolExecutor, as_completed
from functools import partial
from pathlib import Path
import json
import logging

import numpy as np
from django.conf import settings
from django.db import transaction
from rest_framework.exceptions import ValidationError

from cellfree.drop import drop_seed, prepare_drop
from cellfree.optimizer import optimize, optimize_ts_baseline
from cellfree.units import db_to_linear
from .models import Campaign, DropRecord
from .reports import ReportWriter, config_hash, json_safe
from .results import (
    NO_SELF_RECYCLING,
    PROPOSED,
    CampaignResult,
    DropResult,
    crossover_bracket,
    is_non_decreasing,
    is_non_increasing,
)
from .serializers import ScenarioSerializer
from .validation import run_validation, validation_rows

logger = logging.getLogger(__name__)

DEFAULT_PRESET = 'paper_baseline'

# relative slack when comparing objectives of two solves
_PAIRED_RTOL = 1e-7
_PAIRED_ATOL = 1e-15


def resolve_scenario_path(source):
    """A scenario file path, or the name of a preset in CELLFREE_SCENARIO_DIR."""
    path = Path(source)
    if path.is_file():
        return path
    name = path.name if path.suffix == '.json' else f"{path.name}.json"
    preset = Path(settings.CELLFREE_SCENARIO_DIR) / name
    if preset.is_file():
        return preset
    raise ValidationError({'config': [f"No scenario file or preset named '{source}'."]})


def load_scenario(source=DEFAULT_PRESET, **overrides):
    """
    Validated Scenario from a file path, a preset name or a dict. Overrides
    that are not None replace top-level keys before validation.
    """
    if isinstance(source, dict):
        data = dict(source)
    else:
        path = resolve_scenario_path(source)
        try:
            data = json.loads(path.read_text(encoding='utf-8'))
        except json.JSONDecodeError as exc:
            raise ValidationError({'config': [f"{path}: {exc}"]})
        if not isinstance(data, dict):
            raise ValidationError({'config': [f"{path}: expected a JSON object"]})
    data.update({key: value for key, value in overrides.items() if value is not None})

    serializer = ScenarioSerializer(data=data)
    serializer.is_valid(raise_exception=True)
    return serializer.save()


def _paired_not_above(lower, upper):
    """lower <= upper up to solver slack."""
    return lower <= upper + _PAIRED_RTOL * abs(upper) + _PAIRED_ATOL


class CampaignService:
    """Runs experiment drivers over the drops of one scenario"""

    def __init__(self, scenario, *, workers=None, out_dir=None, command=''):
        self.scenario = scenario
        self.workers = max(1, workers or getattr(settings, 'CELLFREE_MAX_WORKERS', 1))
        self.out_dir = Path(out_dir) if out_dir else None
        self.command = command

    def create_campaign(self, kind, parameters=None):
        scenario_dict = self.scenario.to_dict()
        return Campaign.objects.create(
            kind=kind,
            scenario=json_safe(scenario_dict),
            config_hash=config_hash(scenario_dict),
            seed=self.scenario.seed,
            drops=self.scenario.drops,
            workers=self.workers,
            parameters=json_safe(parameters or {}),
        )

    def _output_dir(self, campaign):
        if self.out_dir is not None:
            return self.out_dir
        root = Path(getattr(settings, 'CELLFREE_OUTPUT_DIR', 'results'))
        return root / f"{campaign.kind}-{campaign.id.hex[:8]}"

    def map_drops(self, campaign, drop_task):
        """
        Runs ``drop_task(drop)`` for every drop of the scenario in parallel.
        Each task returns a list of DropResult; the lists are concatenated
        in drop-index order, whatever the completion order.
        """
        n_drops = self.scenario.drops
        by_index = {}
        max_workers = min(n_drops, self.workers)

        def work(index):
            drop = prepare_drop(self.scenario, drop_seed(self.scenario.seed, index), index)
            return drop_task(drop)

        with ThreadPoolExecutor(max_workers=max_workers) as executor:
            future_to_index = {executor.submit(work, index): index for index in range(n_drops)}
            for future in as_completed(future_to_index):
                index = future_to_index[future]
                try:
                    by_index[index] = future.result()
                except Exception:
                    logger.error("[Campaign %s] [Drop %d] failed", campaign.id, index)
                    for pending in future_to_index:
                        pending.cancel()
                    raise
                outages = sum(not r.feasible for r in by_index[index])
                logger.info(
                    "[Campaign %s] [Drop %d] done: %d solves, %d outages (%d/%d drops)",
                    campaign.id, index, len(by_index[index]), outages, len(by_index), n_drops,
                )
        return [result for index in range(n_drops) for result in by_index[index]]

    def _execute(self, campaign, sweep_var, drop_task, finalize):
        out_dir = self._output_dir(campaign)
        campaign.output_dir = str(out_dir)
        campaign.save(update_fields=['output_dir'])
        campaign.mark_running()
        logger.info(
            "[Campaign %s] %s: %d drops, seed %d, %d workers, output in %s",
            campaign.id, campaign.kind, self.scenario.drops, self.scenario.seed, self.workers, out_dir,
        )
        try:
            drops = self.map_drops(campaign, drop_task) if drop_task is not None else []
            result = CampaignResult(kind=campaign.kind, drops=drops, sweep_var=sweep_var)
            writer = ReportWriter(out_dir)
            summary = finalize(result, writer)
            self._store_records(campaign, result)
            writer.write_manifest(
                command=self.command or campaign.kind,
                scenario_dict=self.scenario.to_dict(),
                seed=self.scenario.seed,
                campaign_id=campaign.id,
                parameters=campaign.parameters,
            )
            summary['files'] = list(writer.files)
            summary['rows'] = [list(row) for row in summary.get('rows', [])]
            campaign.mark_completed(json_safe(summary))
        except Exception as exc:
            logger.exception("[Campaign %s] failed", campaign.id)
            campaign.mark_failed(f"{type(exc).__name__}: {exc}")
            raise

        for row in summary['rows']:
            if row[3] in ('outage_rate', 'battery_fraction', 'se_per_user'):
                logger.info("[Campaign %s] %s=%s %s %s=%s", campaign.id, row[0] or '-', row[1], row[2], row[3], row[4])
        logger.info("[Campaign %s] ✓ completed, %d drop records", campaign.id, len(result.drops))
        return campaign, result

    def _store_records(self, campaign, result):
        records = [
            DropRecord(
                campaign=campaign,
                drop_index=d.drop_index,
                algorithm=d.algorithm,
                sweep_var=d.sweep_var,
                sweep_value=d.sweep_value,
                feasible=d.feasible,
                objective=d.objective,
                iterations=d.iterations,
                data=json_safe(d.record_data()),
            )
            for d in result.drops
        ]
        with transaction.atomic():
            DropRecord.objects.bulk_create(records, batch_size=500)

    def _converged(self, drop_result):
        """Stopped before the iteration cap, or met the tolerance on its last step."""
        config = self.scenario.optimizer
        trace = drop_result.objective_trace
        if len(trace) < max(2, config.max_iterations):
            return True
        return abs(trace[-1] - trace[-2]) <= config.convergence_tol * max(1.0, abs(trace[-1]))

    def _ts_grid(self, tau_d_grid=None):
        if tau_d_grid is None:
            tau_d_grid = self.scenario.baseline.tau_d_grid if self.scenario.baseline is not None else ()
        grid = tuple(int(t) for t in tau_d_grid)
        for tau_d in grid:
            self.scenario.ts_tau_u(tau_d)
        return grid

    def run_campaign(self, baseline=True):
        """Proposed scheme (and the time-switching baseline) on every drop."""
        tau_d_grid = self._ts_grid() if baseline else ()
        campaign = self.create_campaign(Campaign.Kind.RUN, {'tau_d_grid': list(tau_d_grid)})

        def task(drop):
            results = [DropResult.from_outcome(drop.index, optimize(self.scenario, drop))]
            for tau_d in tau_d_grid:
                results.append(DropResult.from_outcome(drop.index, optimize_ts_baseline(self.scenario, drop, tau_d)))
            return results

        def finalize(result, writer):
            rows = result.aggregate_rows()
            writer.write_table('run.csv', rows)
            writer.write_drops('run_drops.csv', result.drops)
            return {
                'rows': rows,
                'outage_rate': {a: result.outage_rate(a) for a in result.algorithms()},
                'anomalies': sum(d.anomaly is not None for d in result.drops),
                'recheck_failures': sum(bool(d.violations) for d in result.drops),
            }

        return self._execute(campaign, '', task, finalize)

    def experiment_convergence(self, mu_list):
        """Objective per iteration for each harvesting efficiency, averaged over drops."""
        mu_list = [float(mu) for mu in mu_list]
        campaign = self.create_campaign(Campaign.Kind.CONVERGENCE, {'mu': mu_list})

        def task(drop):
            return [
                DropResult.from_outcome(drop.index, optimize(self.scenario, drop, mu=mu), 'mu', mu)
                for mu in mu_list
            ]

        def finalize(result, writer):
            rows = result.aggregate_rows() + result.trace_rows()
            writer.write_table('convergence.csv', rows)
            writer.write_drops('convergence_drops.csv', result.drops)

            ordered = sorted(mu_list)
            per_mu = [result.by_drop(PROPOSED, mu) for mu in ordered]
            strictly, weakly, paired = 0, 0, 0
            for index in range(self.scenario.drops):
                group = [by_index[index] for by_index in per_mu]
                if not all(d.feasible for d in group):
                    continue
                objectives = [d.objective for d in group]
                paired += 1
                strictly += all(b < a for a, b in zip(objectives, objectives[1:]))
                weakly += all(_paired_not_above(b, a) for a, b in zip(objectives, objectives[1:]))
            iterations = [result.metric('iterations', PROPOSED, mu)[0] for mu in ordered]
            feasible = [d for d in result.drops if d.feasible]
            converged = sum(self._converged(d) for d in feasible)
            return {
                'rows': rows,
                'paired_drops': paired,
                'share_strictly_decreasing_in_mu': strictly / paired if paired else None,
                'share_non_increasing_in_mu': weakly / paired if paired else None,
                'mean_iterations': {repr(mu): n for mu, n in zip(ordered, iterations)},
                'iterations_non_decreasing_in_mu': is_non_decreasing(iterations),
                'share_converged': converged / len(feasible) if feasible else None,
            }

        return self._execute(campaign, 'mu', task, finalize)

    def experiment_rsi_sweep(self, rsi_grid_db):
        """
        Battery fraction and SE against the residual self-interference level.
        The time-switching baseline has no self-interference, so it is solved
        once per drop and reported at every grid point.
        """
        rsi_grid_db = [float(r) for r in rsi_grid_db]
        tau_d_grid = self._ts_grid()
        campaign = self.create_campaign(
            Campaign.Kind.RSI_SWEEP, {'rsi_db': rsi_grid_db, 'tau_d_grid': list(tau_d_grid)}
        )
        M = self.scenario.M

        def task(drop):
            results = []
            baselines = [
                DropResult.from_outcome(drop.index, optimize_ts_baseline(self.scenario, drop, tau_d))
                for tau_d in tau_d_grid
            ]
            for rsi_db in rsi_grid_db:
                rsi = np.full(M, float(db_to_linear(rsi_db)))
                outcome = optimize(self.scenario, drop, rsi=rsi)
                results.append(DropResult.from_outcome(drop.index, outcome, 'rsi_db', rsi_db))
                results.extend(b.at('rsi_db', rsi_db) for b in baselines)
            return results

        def finalize(result, writer):
            rows = result.aggregate_rows()
            writer.write_table('rsi_sweep.csv', rows)
            writer.write_drops('rsi_sweep_drops.csv', result.drops)

            proposed_fraction = [result.mean_battery_fraction(PROPOSED, r) for r in rsi_grid_db]
            proposed_se = [result.mean_se(PROPOSED, r) for r in rsi_grid_db]
            ordered = np.argsort(rsi_grid_db)
            crossover, ts_spread = {}, {}
            for tau_d in tau_d_grid:
                label = f"ts_tau{tau_d}"
                fraction = [result.mean_battery_fraction(label, r) for r in rsi_grid_db]
                crossover[label] = crossover_bracket(rsi_grid_db, proposed_fraction, fraction)
                finite = [f for f in fraction if not np.isnan(f)]
                ts_spread[label] = float(max(finite) - min(finite)) if finite else None
            return {
                'rows': rows,
                'proposed_fraction_non_decreasing_in_rsi': is_non_decreasing([proposed_fraction[i] for i in ordered]),
                'proposed_se_non_increasing_in_rsi': is_non_increasing([proposed_se[i] for i in ordered], tol=1e-9),
                'crossover_bracket_db': crossover,
                'ts_fraction_spread': ts_spread,
            }

        return self._execute(campaign, 'rsi_db', task, finalize)

    def experiment_outage(self, rate_grid, tau_d_grid=None):
        """
        Outage rate against the rate demand. Feasibility only shrinks as the
        demand grows, so once a drop is infeasible for an algorithm the
        higher demands are recorded as outages without solving.
        """
        rates = sorted(float(r) for r in rate_grid)
        tau_d_grid = self._ts_grid(tau_d_grid)
        campaign = self.create_campaign(Campaign.Kind.OUTAGE, {'r_th': rates, 'tau_d_grid': list(tau_d_grid)})
        K = self.scenario.K

        solvers = [(PROPOSED, partial(optimize, self.scenario))]
        solvers += [
            (f"ts_tau{tau_d}", partial(optimize_ts_baseline, self.scenario, tau_d=tau_d))
            for tau_d in tau_d_grid
        ]

        def task(drop):
            results = []
            for label, solve in solvers:
                infeasible = False
                for rate in rates:
                    if infeasible:
                        results.append(DropResult.skipped_outage(drop.index, label, K, 'r_th', rate))
                        continue
                    outcome = solve(drop, rate_demands=rate)
                    results.append(DropResult.from_outcome(drop.index, outcome, 'r_th', rate))
                    infeasible = not outcome.feasible
            return results

        def finalize(result, writer):
            rows = result.aggregate_rows(metrics=('outage_rate', 'battery_fraction', 'se_per_user'))
            writer.write_table('outage.csv', rows)
            writer.write_drops('outage_drops.csv', result.drops)

            outage = {label: [result.outage_rate(label, r) for r in rates] for label, _ in solvers}
            ts_labels = [label for label, _ in solvers[1:]]
            return {
                'rows': rows,
                'outage_non_decreasing_in_rate': {label: is_non_decreasing(v) for label, v in outage.items()},
                'proposed_not_above_ts': all(
                    outage[PROPOSED][i] <= outage[label][i] for label in ts_labels for i in range(len(rates))
                ),
                'ts_outage_non_decreasing_in_tau_d': all(
                    is_non_decreasing([outage[label][i] for label in ts_labels]) for i in range(len(rates))
                ),
            }

        return self._execute(campaign, 'r_th', task, finalize)

    def experiment_self_recycling_ablation(self):
        """Paired solves with and without a user harvesting its own transmission."""
        campaign = self.create_campaign(Campaign.Kind.ABLATION)

        def task(drop):
            with_loop = optimize(self.scenario, drop)
            without = optimize(self.scenario, drop, self_recycling=False, label=NO_SELF_RECYCLING)
            return [DropResult.from_outcome(drop.index, with_loop), DropResult.from_outcome(drop.index, without)]

        def finalize(result, writer):
            rows = result.aggregate_rows()
            writer.write_table('ablation.csv', rows)
            writer.write_drops('ablation_drops.csv', result.drops)

            paired, first_violations, converged_lower = 0, [], 0
            feasibility_violations = []
            with_by_drop = result.by_drop(PROPOSED)
            without_by_drop = result.by_drop(NO_SELF_RECYCLING)
            for index in range(self.scenario.drops):
                with_loop, without = with_by_drop[index], without_by_drop[index]
                if without.feasible and not with_loop.feasible:
                    feasibility_violations.append(index)
                if not (with_loop.feasible and without.feasible):
                    continue
                paired += 1
                if not _paired_not_above(with_loop.first_objective, without.first_objective):
                    first_violations.append(index)
                converged_lower += _paired_not_above(with_loop.objective, without.objective)
            if first_violations or feasibility_violations:
                logger.warning(
                    "[Campaign %s] self-recycling raised the first-iteration objective on drops %s, "
                    "lost feasibility on drops %s", campaign.id, first_violations, feasibility_violations,
                )
            return {
                'rows': rows,
                'paired_drops': paired,
                'first_objective_violations': first_violations,
                'feasibility_violations': feasibility_violations,
                'share_converged_not_above': converged_lower / paired if paired else None,
            }

        return self._execute(campaign, '', task, finalize)

    def validate_closed_forms(self, n_samples, cases=None):
        """Monte-Carlo check of every closed-form element on a grid of small instances."""
        campaign = self.create_campaign(Campaign.Kind.VALIDATE, {'samples': int(n_samples)})

        def finalize(result, writer):
            report = run_validation(
                self.scenario,
                n_samples,
                cases=cases,
                workers=self.workers,
                batch_size=getattr(settings, 'CELLFREE_MC_BATCH_SIZE', 20_000),
            )
            rows = validation_rows(report)
            writer.write_table('validation.csv', rows)
            writer.write_json('validation.json', report)
            return {'rows': rows, 'gate': report['gate'], 'literal_tau': report['literal_tau']}

        return self._execute(campaign, 'case', None, finalize)
