import pytest

from anonchan.groupsig import gs_join
from anonchan.net import cli
from anonchan.net.keyfile import Kind, dump_keys, load_keys, read_keyfile, write_keyfile
from anonchan.pairing import DecodeError
from anonchan.protocol import gm_setup, kgc_setup


def test_keyfile_round_trip(tmp_path):
    gpk, ik = gm_setup()
    params, msk = kgc_setup()
    sk = gs_join(gpk, ik)
    write_keyfile(tmp_path / "k", gpk, ik, params, msk, sk)
    keys = read_keyfile(tmp_path / "k")
    assert set(keys) == {Kind.GPK, Kind.IK, Kind.PARAMS, Kind.MSK, Kind.SK}
    assert keys[Kind.GPK].W == gpk.W and keys[Kind.IK] == ik and keys[Kind.SK] == sk
    raw = dump_keys(gpk)
    assert raw[0] == Kind.GPK and int.from_bytes(raw[1:5], "big") == len(gpk.to_bytes())


def test_keyfile_errors():
    gpk, _ = gm_setup()
    raw = dump_keys(gpk)
    for bad in (raw[:3], raw[:-1], b"\x09" + raw[1:], raw + raw):
        with pytest.raises(DecodeError):
            load_keys(bad)


def test_cli_setup_and_harness(tmp_path, capsys):
    assert cli.main(["setup", "--out", str(tmp_path)]) == 0
    assert Kind.IK in read_keyfile(tmp_path / "gm.key")
    assert Kind.MSK in read_keyfile(tmp_path / "kgc.key")
    assert set(read_keyfile(tmp_path / "public.key")) == {Kind.GPK, Kind.PARAMS}
    assert (tmp_path / "kgc.key").stat().st_mode & 0o077 == 0
    capsys.readouterr()
    assert cli.main(["harness", "--game", "uf", "--trials", "100", "--seed", "1"]) == 0
    out = capsys.readouterr().out
    assert out.count("game=unforgeability") == 4
    assert cli.main(["harness", "--game", "extract", "--trials", "3", "--seed", "1"]) == 0


def test_cli_bench(capsys):
    assert cli.main(["bench", "--iterations", "3", "--offline-sign"]) == 0
    out = capsys.readouterr().out
    for name in ("GM.Setup", "KGC.Setup", "Join", "UserKeyGen", "SendRequest", "ValidityCheck", "SendContent", "GetContent", "Session"):
        assert f"bench name={name} " in out
    assert "check=offline_faster" in out


def test_cli_rejects_bad_arguments(tmp_path):
    with pytest.raises(SystemExit):
        cli.main(["proxy", "--listen", "nonsense"])
    with pytest.raises(SystemExit):
        cli.main(["proxy", "--hops", "127.0.0.1:1,127.0.0.1:2"])
    cli.main(["setup", "--out", str(tmp_path)])
    with pytest.raises(SystemExit):
        cli.main(["gm", "--keyfile", str(tmp_path / "public.key")])
