import json

from rigidmarket.cli import main


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_run_table(capsys, data_dir):
    code, out, _ = run_cli(
        capsys, "run", str(data_dir / "example_market.json"), "--scripted-winners", "2"
    )
    assert code == 0
    assert "6.1" in out
    assert "final prices: (0,5,4,4,7)" in out
    assert "lottery at t=3: item c among {2,3} -> buyer 2" in out


def test_run_json_reingests_into_check(capsys, tmp_path, data_dir):
    economy_path = str(data_dir / "example_market.json")
    code, out, _ = run_cli(capsys, "run", economy_path, "--format", "json", "--seed", "4")
    assert code == 0
    lines = out.strip().splitlines()
    rows = [json.loads(line) for line in lines]
    assert all("t" in r for r in rows[:-1])
    final = rows[-1]["final"]

    tuple_path = tmp_path / "tuple.json"
    tuple_path.write_text(json.dumps(final))
    code, out, _ = run_cli(capsys, "check", economy_path, "--tuple", str(tuple_path))
    assert code == 0
    assert "all conditions satisfied" in out


def test_check_reports_failure(capsys, tmp_path, data_dir):
    bad = {
        "prices": [5, 4, 4, 7],
        "rationing_zeros": [[1, "c"], [3, "c"]],
        "allocation": ["o", "c", "b", "a", "o"],  # d left unsold above its floor
    }
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(bad))
    code, out, _ = run_cli(
        capsys, "check", str(data_dir / "example_market.json"), "--tuple", str(path)
    )
    assert code == 1
    assert "FAIL" in out
    assert "not a constrained Walrasian equilibrium" in out


def test_seed_determinism_and_flag_exclusion(capsys, data_dir):
    path = str(data_dir / "example_market.json")
    _, first, _ = run_cli(capsys, "run", path, "--seed", "7")
    _, second, _ = run_cli(capsys, "run", path, "--seed", "7")
    assert first == second

    code, _, err = run_cli(capsys, "run", path, "--seed", "7", "--scripted-winners", "2")
    assert code == 1
    assert "mutually exclusive" in err


def test_expect_output(capsys, data_dir):
    code, out, _ = run_cli(capsys, "expect", str(data_dir / "example_market.json"))
    assert code == 0
    assert "u*[1] = 0/1" in out
    assert "u*[3] = 5/2" in out
    assert "p*[a] = 5/1" in out


def test_expect_histories_and_node_limit(capsys, data_dir):
    path = str(data_dir / "example_market.json")
    code, out, _ = run_cli(capsys, "expect", path, "--histories")
    assert code == 0
    assert out.count("history prob=1/2") == 2

    code, _, err = run_cli(capsys, "expect", path, "--node-limit", "2")
    assert code == 2
    assert "exceeded" in err


def test_manipulate_single_strategy(capsys, data_dir):
    path = str(data_dir / "example_market.json")
    code, out, _ = run_cli(
        capsys, "manipulate", path, "--buyer", "1", "--strategy", "4,3,9,7"
    )
    assert code == 0
    assert "expected profit for buyer 1: 1/3" in out


def test_manipulate_search(capsys, data_dir):
    code, out, _ = run_cli(
        capsys, "manipulate", str(data_dir / "example_market.json"), "--cap", "5"
    )
    assert code == 0
    assert "truthful expected profit: 0/1" in out
    assert "truthful reporting optimal within the cap: no" in out


def test_matching_command(capsys, data_dir):
    path = str(data_dir / "example_market.json")
    code, out, _ = run_cli(capsys, "matching", path, "--prices", "5,4,3,5")
    assert code == 0
    assert "D_1 = {c,d}" in out
    assert "maximum matching (3 edges): 1-c 4-a 5-d" in out
    assert "equilibrium allocation exists: no" in out

    code, out, _ = run_cli(
        capsys, "matching", path, "--prices", "5,4,4,7", "--forbid", "1:c", "--forbid", "3:c"
    )
    assert code == 0
    assert "equilibrium allocation exists: yes" in out

    code, _, err = run_cli(capsys, "matching", path, "--prices", "9,9,9,9")
    assert code == 1
    assert "not admissible" in err


def test_invalid_inputs_exit_one(capsys, tmp_path, data_dir):
    missing = str(tmp_path / "nope.json")
    code, _, err = run_cli(capsys, "run", missing)
    assert code == 1 and "no such file" in err

    mangled = tmp_path / "mangled.json"
    mangled.write_text("{not json")
    code, _, err = run_cli(capsys, "run", str(mangled))
    assert code == 1 and "malformed JSON" in err

    crossed = tmp_path / "crossed.json"
    crossed.write_text(
        json.dumps(
            {
                "items": ["a"],
                "buyers": 1,
                "valuations": [[3]],
                "lower_bounds": [7],
                "upper_bounds": [6],
            }
        )
    )
    code, _, err = run_cli(capsys, "run", str(crossed))
    assert code == 1 and "BoundsCrossed" in err
