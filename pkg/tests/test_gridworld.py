import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from conftest import CORRIDOR, open_map
from oracles import quad_truncated_mean
from mobles.gridworld import (COLLISION_REWARD, DEFAULT_REWARDS, DOWN, GOAL_REWARD, LEFT,
                              RIGHT, STEP_REWARD, UP, GridMaze, MapError, MazeEnv, RewardSpec,
                              exact_q, ir_sensors, load_map, load_map_file, observe, reachable,
                              reset, sample_reward, shipped_maps, step, true_model)


class TestLoadMap:
    def test_smallest_map(self):
        maze = load_map("###/#G#/###")
        assert maze.goal == (2, 2)
        assert maze.start_cells() == []

    def test_open_interior_counts(self):
        maze = load_map(open_map(7))
        assert len(maze.free_cells()) == 25
        assert maze.goal == (6, 6)

    def test_coordinates(self):
        maze = load_map("#####\n#..G#\n#.#.#\n#####")
        # y counts from the bottom row
        assert maze.goal == (4, 3)
        assert maze.is_wall((3, 2))
        assert not maze.is_wall((2, 2))

    @pytest.mark.parametrize("text,msg", [
        ("###/#X#/###", "unknown character"),
        ("###/#G/###", "rectangular"),
        ("###/#.#/###", "exactly one goal"),
        ("####/#GG#/####", "exactly one goal"),
        ("###/.G#/###", "bordered"),
        ("", "empty"),
    ])
    def test_errors(self, text, msg):
        with pytest.raises(MapError, match=msg):
            load_map(text)

    def test_comments_ignored(self):
        maze = load_map("; a comment\n###\n#G#\n###\n")
        assert maze.width == 3

    def test_shipped_maps(self):
        names = shipped_maps()
        assert names == ["four_rooms", "nine_rooms", "open_room", "semi_random"]
        sizes = {"open_room": 10, "four_rooms": 11, "nine_rooms": 13, "semi_random": 12}
        for name in names:
            maze = load_map_file(name)
            assert maze.width - 2 == sizes[name]
            assert maze.height - 2 == sizes[name]

    def test_semi_random_density(self):
        maze = load_map_file("semi_random")
        interior = 12 * 12
        obstacles = interior - len(maze.free_cells())
        assert obstacles == round(0.2 * interior)

    @pytest.mark.parametrize("name", ["open_room", "four_rooms", "nine_rooms", "semi_random"])
    def test_shipped_maps_connected(self, name):
        maze = load_map_file(name)
        seen = {maze.goal}
        frontier = [maze.goal]
        while frontier:
            c = frontier.pop()
            for n in reachable(maze, c):
                if n not in seen:
                    seen.add(n)
                    frontier.append(n)
        assert seen == set(maze.free_cells())


class TestRewards:
    def test_reward_intervals(self):
        assert (COLLISION_REWARD.lo, COLLISION_REWARD.hi) == (-12.0, -10.0)
        assert (GOAL_REWARD.lo, GOAL_REWARD.hi) == (9.5, 11.5)
        assert (STEP_REWARD.lo, STEP_REWARD.hi) == (-2.0, 0.0)
        assert all(s.length == 2.0 for s in DEFAULT_REWARDS.values())

    @pytest.mark.parametrize("spec", [COLLISION_REWARD, GOAL_REWARD, STEP_REWARD])
    def test_closed_form_mean_matches_quadrature(self, spec):
        assert spec.truncated_mean() == pytest.approx(quad_truncated_mean(spec), abs=1e-9)

    def test_frozen_means(self):
        # high-precision quadrature values
        assert STEP_REWARD.truncated_mean() == pytest.approx(-0.8622823768860767, abs=1e-12)
        assert COLLISION_REWARD.truncated_mean() == pytest.approx(-10.862282376886077, abs=1e-12)
        assert GOAL_REWARD.truncated_mean() == pytest.approx(10.0, abs=1e-12)

    def test_step_samples_in_interval_and_mean(self, rng):
        n = 100_000
        xs = np.array([sample_reward(STEP_REWARD, rng) for _ in range(n)])
        assert xs.min() >= -2.0 and xs.max() <= 0.0
        tol = 3 * xs.std() / math.sqrt(n)
        assert abs(xs.mean() - quad_truncated_mean(STEP_REWARD)) <= tol

    def test_degenerate_spec(self, rng):
        spec = RewardSpec(((1.0, 0.0, 1e-9),), -1.0, 1.0)
        assert all(abs(sample_reward(spec, rng)) < 1e-6 for _ in range(100))

    @pytest.mark.parametrize("comps,lo,hi", [
        (((0.5, 0.0, 1.0),), -1.0, 1.0),
        (((1.0, 0.0, 0.0),), -1.0, 1.0),
        (((1.0, 0.0, 1.0),), 1.0, 1.0),
        (((1.0, 100.0, 1.0),), -1.0, 1.0),
    ])
    def test_invalid_specs(self, comps, lo, hi):
        with pytest.raises(ValueError):
            RewardSpec(comps, lo, hi)


class TestReset:
    def test_single_candidate(self, rng):
        maze = load_map("####/#.G#/####")
        assert {reset(maze, rng) for _ in range(20)} == {(2, 2)}

    def test_no_candidate(self, rng):
        with pytest.raises(ValueError):
            reset(load_map("###/#G#/###"), rng)

    def test_uniform(self, open7, rng):
        n = 100_000
        cells = open7.start_cells()
        assert len(cells) == 24
        counts = {c: 0 for c in cells}
        for _ in range(n):
            counts[reset(open7, rng)] += 1
        obs = np.array(list(counts.values()))
        assert stats.chisquare(obs).pvalue > 1e-3
        sigma = math.sqrt(n * (1 / 24) * (23 / 24))
        assert np.all(np.abs(obs - n / 24) <= 3 * sigma + 1)

    def test_deterministic(self, open7):
        a = [reset(open7, np.random.default_rng(3)) for _ in range(5)]
        b = [reset(open7, np.random.default_rng(3)) for _ in range(5)]
        assert a == b


class TestStep:
    def test_collision(self, open7, rng):
        maze = open7.with_slip(0.0)
        nxt, r, done, len_r = step(maze, (2, 2), LEFT, rng)
        assert nxt == (2, 2) and not done
        assert -12.0 <= r <= -10.0
        assert len_r == 2.0

    def test_goal(self, open7, rng):
        maze = open7.with_slip(0.0)
        nxt, r, done, len_r = step(maze, (5, 6), RIGHT, rng)
        assert nxt == maze.goal and done
        assert 9.5 <= r <= 11.5 and len_r == 2.0

    def test_deterministic_move(self, open7, rng):
        maze = open7.with_slip(0.0)
        for _ in range(50):
            nxt, r, done, _ = step(maze, (3, 3), UP, rng)
            assert nxt == (3, 4) and -2.0 <= r <= 0.0 and not done

    def test_bad_state(self, open7, rng):
        with pytest.raises(ValueError):
            step(open7, open7.goal, UP, rng)
        with pytest.raises(ValueError):
            step(open7, (1, 1), UP, rng)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_never_enters_wall(self, seed):
        maze = load_map_file("four_rooms")
        rng = np.random.default_rng(seed)
        s = reset(maze, rng)
        for _ in range(200):
            nxt, r, done, _ = step(maze, s, int(rng.integers(4)), rng)
            assert not maze.is_wall(nxt)
            assert done == (nxt == maze.goal)
            if done:
                break
            s = nxt

    def test_trace_reproducible(self):
        env = MazeEnv(load_map_file("nine_rooms"))

        def trace(seed):
            rng = np.random.default_rng(seed)
            out = [env.reset(rng)]
            for _ in range(100):
                obs, r, done, _ = env.step(int(rng.integers(4)), rng)
                out.append((obs, r))
                if done:
                    break
            return out

        assert trace(9) == trace(9)


class TestSensors:
    def test_open_interior(self, open7):
        assert ir_sensors(open7, (4, 3)) == (0, 0, 0, 0)

    def test_left_border(self, open7):
        assert ir_sensors(open7, (2, 4))[3] == 1

    def test_corner(self, open7):
        # bottom-left interior corner: down and left are walls
        assert ir_sensors(open7, (2, 2)) == (0, 0, 1, 1)

    def test_observe_modes(self, open7):
        assert observe(open7, (2, 2), 2) == (2, 2)
        assert observe(open7, (2, 2), 6) == (2, 2, 0, 0, 1, 1)


class TestTrueModel:
    def test_open_interior_probs(self, open7):
        mdp = true_model(open7)
        s = mdp.index((4, 4))
        assert mdp.P[s, UP, mdp.index((4, 5))] == pytest.approx(0.925)
        for cell in [(4, 3), (5, 4), (3, 4)]:
            assert mdp.P[s, UP, mdp.index(cell)] == pytest.approx(0.025)

    def test_boxed_cell(self):
        maze = load_map("#####\n#.#G#\n#####")
        mdp = true_model(maze)
        s = mdp.index((2, 2))
        assert np.all(mdp.P[s, :, s] == 1.0)

    def test_rows_normalised(self):
        mdp = true_model(load_map_file("semi_random"), 6)
        sums = mdp.P.sum(axis=2)
        assert np.all(np.abs(sums - 1.0) <= 1e-12)

    def test_expected_reward(self, open7):
        mdp = true_model(open7)
        s = mdp.index((2, 2))
        step_m, coll_m = STEP_REWARD.truncated_mean(), COLLISION_REWARD.truncated_mean()
        # moving up from the corner: up 0.925 + right 0.025 are steps, two slips hit walls
        assert mdp.R[s, UP] == pytest.approx(0.95 * step_m + 0.05 * coll_m)

    def test_matches_monte_carlo(self):
        maze = load_map_file("four_rooms")
        mdp = true_model(maze)
        rng = np.random.default_rng(7)
        n = 100_000
        cell, a = (2, 2), RIGHT
        s = mdp.index(cell)
        counts = np.zeros(mdp.P.shape[2])
        for _ in range(n):
            nxt, _, done, _ = step(maze, cell, a, rng)
            counts[mdp.terminal if done else mdp.index(nxt)] += 1
        p = mdp.P[s, a]
        freq = counts / n
        assert np.all(np.abs(freq - p) <= 4 * np.sqrt(p * (1 - p) / n) + 1e-12)

    def test_corridor_values(self):
        maze = load_map(CORRIDOR).with_slip(0.0)
        mdp = true_model(maze)
        q = exact_q(mdp, 0.9)
        g = GOAL_REWARD.truncated_mean()
        s = STEP_REWARD.truncated_mean()
        assert q[mdp.index((5, 2)), RIGHT] == pytest.approx(g)
        assert q[mdp.index((4, 2)), RIGHT] == pytest.approx(s + 0.9 * g)
        assert np.all(np.argmax(q[:-1], axis=1) == RIGHT)


class TestEnv:
    def test_support_includes_self(self, open7):
        env = MazeEnv(open7)
        sup = env.support()
        assert sup[(4, 4)] == [(3, 4), (4, 3), (4, 4), (4, 5), (5, 4)]
        assert open7.goal not in sup

    def test_feature_spec(self, open7):
        assert [f[0] for f in MazeEnv(open7, 6).feature_spec()] == [
            "x", "y", "ir_up", "ir_right", "ir_down", "ir_left"]

    def test_bad_sensors(self, open7):
        with pytest.raises(ValueError):
            MazeEnv(open7, 3)

    def test_grid_validation(self):
        walls = ((True,) * 3, (True, False, True), (True,) * 3)
        with pytest.raises(MapError):
            GridMaze(3, 3, walls, (1, 1))
