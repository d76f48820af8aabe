import io
import subprocess
import sys


from slhash.cli import run


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


def test_hash_trits():
    code, out, _ = call("hash", "--n", "3", "--p", "11", "--trits", "13213")
    assert code == 0
    assert out.strip() == "00010300010b0a030601020308010a"


def test_hash_matrix_format():
    code, out, _ = call("hash", "--p", "11", "--trits", "", "--format", "matrix")
    assert code == 0
    assert out.splitlines()[1:] == ["1 0 0", "0 1 0", "0 0 1"]


def test_hash_empty_stdin():
    proc = subprocess.run([sys.executable, "-m", "slhash", "hash", "--p", "11"],
                          input=b"", capture_output=True)
    assert proc.returncode == 0
    assert proc.stdout.decode().strip() == "00010300010b010000000100000001"


def test_hash_files_and_parallel(tmp_path):
    f = tmp_path / "data.bin"
    f.write_bytes(bytes(range(256)) * 8)
    serial = call("hash", "--p", "101", str(f))
    par = call("hash", "--p", "101", "--parallel", "3", "--min-segment", "50", str(f))
    assert serial[0] == par[0] == 0
    assert serial[1] == par[1]


def test_hash_deterministic():
    a = call("hash", "--p", "13", "--trits", "3213213123121")
    b = call("hash", "--p", "13", "--trits", "3213213123121")
    assert a == b


def test_usage_errors():
    assert call("hash", "--p", "11", "--trits", "124")[0] == 1
    assert call("frobnicate")[0] == 1
    assert call("hash", "--trits", "1")[0] == 1
    assert call("hash", "--p", "11", "/nonexistent/file")[0] == 1


def test_params_validate():
    code, out, _ = call("params", "validate", "--n", "3", "--p", "11", "--a", "4", "--b", "2", "--ell", "4")
    assert code == 0 and out.startswith("valid") and "c=160" in out
    code, _, err = call("params", "validate", "--n", "3", "--p", "11", "--a", "5", "--b", "2", "--ell", "4")
    assert code == 2
    assert "a ≡ 1 (mod 3)" in err


def test_params_generation():
    code, out, _ = call("params", "validate", "--p", "3", "--check-generation")
    assert code == 0 and "generates order=5616" in out


def test_budget_exit(monkeypatch):
    monkeypatch.setenv("SLHASH_BUDGET", "1000")
    code, out, err = call("params", "validate", "--p", "101", "--check-generation")
    assert code == 3
    code, _, err = call("analyze", "mixing", "--p", "101", "--kmax", "2")
    assert code == 3 and "budget" in err


def test_config_file(tmp_path):
    cfg = tmp_path / "p.cfg"
    cfg.write_text("n = 3\np = 11\na = 4\nb = 2\nell = 4\n")
    assert call("hash", "--config", str(cfg), "--trits", "13213")[1].strip() == "00010300010b0a030601020308010a"


def test_analyze_girth():
    code, out, _ = call("analyze", "girth", "--p", "3")
    lines = out.splitlines()
    assert code == 0 and lines[0] == "n,p,c,lower_bound,measured,relator"
    assert lines[1].startswith("3,3,160,0,3,")


def test_analyze_mixing():
    code, out, _ = call("analyze", "mixing", "--p", "3", "--kmax", "5")
    rows = out.splitlines()
    assert code == 0 and rows[0] == "k,linf,bound" and len(rows) == 7


def test_analyze_attack_deterministic():
    a = call("analyze", "attack", "--p", "3", "--k", "10", "--trials", "2000", "--seed", "5")
    b = call("analyze", "attack", "--p", "3", "--k", "10", "--trials", "2000", "--seed", "5")
    assert a == b and a[0] == 0
    header, row = a[1].splitlines()
    assert header == "exact,empirical,ci_low,ci_high,epsilon,bound"
    vals = [float(v) for v in row.split(",")]
    assert vals[0] <= vals[5]


def test_analyze_tails(tmp_path):
    code, out, _ = call("analyze", "tails")
    good = {line.split(",")[0] for line in out.splitlines()[1:] if ",good," in line}
    assert good == {"11", "31", "22", "32", "13", "23"}
    grid = tmp_path / "t.txt"
    grid.write_text("A^-1: B A^-1 B^-1\nB^-1: A A^-1 B^-1\nA: A B^-1 B\nB: A A^-1 B\n")
    assert call("analyze", "tails", "--table", str(grid))[1] == out


def test_attack_palindrome():
    code, out, _ = call("attack", "palindrome", "--p", "5", "--density")
    assert code == 0
    assert "SL,372000,120," in out
    assert out.count("\n") > 10


def test_attack_verify_and_emit(tmp_path):
    word = tmp_path / "w.txt"
    word.write_text("3 0\n")
    assert call("attack", "verify", "--p", "3", "--word", str(word))[1] == "true\n"
    word.write_text("1 1\n")
    assert call("attack", "verify", "--p", "3", "--word", str(word))[1] == "false\n"
    code, out, _ = call("attack", "emit-em", "--p", "11", "--m", "1")
    assert code == 0 and out.startswith("# n=3 p=11 m=1")
    assert len([l for l in out.splitlines() if not l.startswith("#")]) == 9
