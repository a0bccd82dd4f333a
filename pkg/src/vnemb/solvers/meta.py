"""Meta-heuristic search over node-assignment vectors.

A candidate assigns every virtual node a physical node; its fitness is
the R2C after routing links in request edge order on a scratch copy, with
infeasible candidates scored below zero by a per-violation penalty so the
search can still climb toward feasibility. The best feasible candidate
seen across all iterations is returned.
"""

import math
from dataclasses import dataclass

import numpy as np

from ..embedding import (FAIL_NODE, Solution, evaluate_solution)
from .ranking import _route_all_links

VIOLATION_PENALTY = 0.01

META_KINDS = ("ga", "pso", "aco", "sa", "ts")


@dataclass
class MetaConfig:
    # genetic algorithm
    population: int = 40
    generations: int = 60
    tournament: int = 3
    crossover_rate: float = 0.9
    mutation_rate: float = 0.1
    # particle swarm (discrete: per-gene copy probabilities)
    swarm: int = 30
    pso_iterations: int = 60
    inertia: float = 0.5
    cognitive: float = 0.25
    social: float = 0.25
    # ant colony
    ants: int = 20
    aco_iterations: int = 50
    evaporation: float = 0.5
    pheromone_weight: float = 1.0
    heuristic_weight: float = 2.0
    # simulated annealing
    initial_temperature: float = 1.0
    cooling: float = 0.95
    sa_steps: int = 500
    # tabu search
    tenure: int = 10
    neighborhood: int = 20
    ts_iterations: int = 200

    def validate(self):
        positives = ("population", "tournament", "swarm", "pso_iterations", "ants",
                     "aco_iterations", "sa_steps", "tenure", "neighborhood",
                     "ts_iterations")
        for name in positives:
            if getattr(self, name) <= 0:
                raise ValueError(f"meta config {name} must be positive")
        if self.generations < 0:
            raise ValueError("generations must be >= 0")
        return self


class _Fitness:
    """Scores assignment vectors and remembers the best feasible one."""

    def __init__(self, instance):
        self.instance = instance
        vn, pn = instance.vn, instance.pn
        self.vn, self.pn = vn, pn
        self.revenue = vn.revenue()
        self.node_part = float(vn.node_demand.sum())
        self.best_fit = -math.inf
        self.best_assign = None
        self.best_paths = None
        self.cache = {}

    def __call__(self, assign):
        key = assign.tobytes()
        if key in self.cache:
            return self.cache[key]
        vn, pn = self.vn, self.pn
        violations = 0
        seen = {}
        for v in range(vn.num_nodes):
            p = int(assign[v])
            if p in seen:
                violations += 1
            seen[p] = v
        usage = np.zeros((vn.node_demand.shape[0], pn.num_nodes))
        for v in range(vn.num_nodes):
            usage[:, int(assign[v])] += vn.node_demand[:, v]
        over = usage > pn.node_available
        violations += int(np.any(over, axis=0).sum())
        paths = None
        if violations == 0:
            link_avail = pn.link_available.copy()
            paths, cost, failed, _ = _route_all_links(
                self.instance, assign, link_avail)
            if failed >= 0:
                violations += sum(1 for p in paths if p is None)
                fit = -VIOLATION_PENALTY * violations
            else:
                fit = self.revenue / (self.node_part + cost) \
                    if self.node_part + cost > 0 else 1.0
        else:
            fit = -VIOLATION_PENALTY * violations
        if fit > self.best_fit:
            self.best_fit = fit
            self.best_assign = assign.copy()
            self.best_paths = paths if fit > 0 else None
        self.cache[key] = fit
        return fit

    def finish(self):
        vn = self.vn
        if self.best_assign is None or self.best_fit <= 0 or self.best_paths is None:
            sol = Solution.empty(vn, reason=FAIL_NODE)
        else:
            sol = Solution(vn.id, self.best_assign.astype(np.int32),
                           self.best_paths, feasible=True)
        evaluate_solution(vn, sol)
        return sol


def _random_assign(rng, n_v, n_p):
    if n_p >= n_v:
        return rng.choice(n_p, size=n_v, replace=False).astype(np.int32)
    return rng.integers(0, n_p, size=n_v).astype(np.int32)


def _move_to_unused(rng, assign, n_p):
    out = assign.copy()
    v = int(rng.integers(len(assign)))
    used = set(int(x) for x in out)
    free = [p for p in range(n_p) if p not in used]
    out[v] = int(rng.integers(n_p)) if not free else free[int(rng.integers(len(free)))]
    return out


class MetaSolver:
    deterministic = False  # seeded-deterministic

    def __init__(self, kind, cfg=None):
        if kind not in META_KINDS:
            raise ValueError(f"unknown meta-heuristic {kind!r}")
        self.kind = kind
        self.cfg = (cfg or MetaConfig()).validate()
        self.name = f"{kind}_meta"

    def solve(self, instance, seed=0):
        rng = np.random.Generator(np.random.PCG64(seed))
        fit = _Fitness(instance)
        getattr(self, f"_run_{self.kind}")(instance, fit, rng)
        return fit.finish()

    def _run_ga(self, instance, fit, rng):
        cfg = self.cfg
        n_v, n_p = instance.vn.num_nodes, instance.pn.num_nodes
        pop = [_random_assign(rng, n_v, n_p) for _ in range(cfg.population)]
        scores = np.array([fit(ind) for ind in pop])
        for _ in range(cfg.generations):
            elite = pop[int(np.argmax(scores))].copy()
            nxt = [elite]
            while len(nxt) < cfg.population:
                picks = rng.integers(0, cfg.population, size=cfg.tournament)
                pa = pop[int(picks[np.argmax(scores[picks])])]
                picks = rng.integers(0, cfg.population, size=cfg.tournament)
                pb = pop[int(picks[np.argmax(scores[picks])])]
                child = pa.copy()
                if rng.random() < cfg.crossover_rate:
                    take = rng.random(n_v) < 0.5
                    child[take] = pb[take]
                mutate = rng.random(n_v) < cfg.mutation_rate
                if mutate.any():
                    child[mutate] = rng.integers(0, n_p, size=int(mutate.sum()))
                nxt.append(child)
            pop = nxt
            scores = np.array([fit(ind) for ind in pop])

    def _run_pso(self, instance, fit, rng):
        cfg = self.cfg
        n_v, n_p = instance.vn.num_nodes, instance.pn.num_nodes
        swarm = [_random_assign(rng, n_v, n_p) for _ in range(cfg.swarm)]
        pbest = [s.copy() for s in swarm]
        pbest_fit = np.array([fit(s) for s in swarm])
        g = int(np.argmax(pbest_fit))
        gbest = pbest[g].copy()
        gbest_fit = pbest_fit[g]
        total = cfg.inertia + cfg.cognitive + cfg.social
        p_keep = cfg.inertia / total
        p_cog = cfg.cognitive / total
        for _ in range(cfg.pso_iterations):
            for i, particle in enumerate(swarm):
                draw = rng.random(n_v)
                new = particle.copy()
                from_pbest = (draw >= p_keep) & (draw < p_keep + p_cog)
                from_gbest = draw >= p_keep + p_cog
                new[from_pbest] = pbest[i][from_pbest]
                new[from_gbest] = gbest[from_gbest]
                jump = rng.random(n_v) < 0.05
                if jump.any():
                    new[jump] = rng.integers(0, n_p, size=int(jump.sum()))
                swarm[i] = new
                score = fit(new)
                if score > pbest_fit[i]:
                    pbest[i] = new.copy()
                    pbest_fit[i] = score
                    if score > gbest_fit:
                        gbest = new.copy()
                        gbest_fit = score

    def _run_aco(self, instance, fit, rng):
        cfg = self.cfg
        vn, pn = instance.vn, instance.pn
        n_v, n_p = vn.num_nodes, pn.num_nodes
        tau = np.ones((n_v, n_p))
        heur = pn.node_available.sum(axis=0)
        heur = heur / heur.max() if heur.max() > 0 else np.full(n_p, 1.0)
        heur = np.maximum(heur, 1e-6) ** cfg.heuristic_weight
        for _ in range(cfg.aco_iterations):
            best_ant = None
            best_ant_fit = -math.inf
            for _ant in range(cfg.ants):
                assign = np.full(n_v, -1, dtype=np.int32)
                used = np.zeros(n_p, dtype=bool)
                for v in range(n_v):
                    weights = (tau[v] ** cfg.pheromone_weight) * heur
                    weights[used] = 0.0
                    total = weights.sum()
                    if total <= 0:
                        assign[v] = int(rng.integers(n_p))
                    else:
                        assign[v] = int(rng.choice(n_p, p=weights / total))
                        used[assign[v]] = True
                score = fit(assign)
                if score > best_ant_fit:
                    best_ant_fit = score
                    best_ant = assign
            tau *= (1.0 - cfg.evaporation)
            deposit = max(best_ant_fit, 0.01)
            for v in range(n_v):
                tau[v, int(best_ant[v])] += deposit

    def _run_sa(self, instance, fit, rng):
        cfg = self.cfg
        n_v, n_p = instance.vn.num_nodes, instance.pn.num_nodes
        current = _random_assign(rng, n_v, n_p)
        cur_fit = fit(current)
        temp = cfg.initial_temperature
        for _ in range(cfg.sa_steps):
            cand = _move_to_unused(rng, current, n_p)
            cand_fit = fit(cand)
            delta = cand_fit - cur_fit
            if delta >= 0 or (temp > 0 and rng.random() < math.exp(delta / temp)):
                current, cur_fit = cand, cand_fit
            temp *= cfg.cooling

    def _run_ts(self, instance, fit, rng):
        cfg = self.cfg
        n_v, n_p = instance.vn.num_nodes, instance.pn.num_nodes
        current = _random_assign(rng, n_v, n_p)
        fit(current)
        tabu = {}
        step = 0
        best_fit_overall = fit.best_fit
        for _ in range(cfg.ts_iterations):
            step += 1
            best_move = None
            best_move_fit = -math.inf
            for _n in range(cfg.neighborhood):
                v = int(rng.integers(n_v))
                p = int(rng.integers(n_p))
                if p == int(current[v]):
                    continue
                cand = current.copy()
                cand[v] = p
                score = fit(cand)
                expiry = tabu.get((v, p), 0)
                if expiry > step and score <= best_fit_overall:
                    continue  # tabu, no aspiration
                if score > best_move_fit:
                    best_move_fit = score
                    best_move = (v, p, cand)
            if best_move is None:
                continue
            v, p, cand = best_move
            tabu[(v, int(current[v]))] = step + cfg.tenure
            current = cand
            best_fit_overall = max(best_fit_overall, best_move_fit)
