import io
import random
import struct
import subprocess
import sys

import pytest

from adaptive_prefix import cli
from adaptive_prefix.container import (HEADER, MAGIC, ContainerHeader, decode_all,
                                       encode_chunks, encode_container)
from adaptive_prefix.errors import ConfigurationError, CorruptStreamError
from adaptive_prefix.freq_model import LengthPolicy


@pytest.fixture
def sample(tmp_path):
    rng = random.Random(0)
    data = bytes(min(int(rng.expovariate(0.1)), 255) for _ in range(20000))
    path = tmp_path / "in.bin"
    path.write_bytes(data)
    return path, data


def run(*argv):
    return cli.main([str(a) for a in argv])


def test_header_layout():
    h = ContainerHeader(1, 1000, 3, 12, 1, (7, 8, 9))
    raw = h.pack()
    assert raw[:4] == b"APC1" and raw[4] == 1 and raw[5] == 1
    assert struct.unpack_from("<Q", raw, 6)[0] == 1000
    assert struct.unpack_from("<I", raw, 14)[0] == 3
    assert raw[18] == 12 and raw[19] == 1
    assert len(raw) == HEADER.size + 12 == 32
    parsed, end = ContainerHeader.unpack(raw)
    assert parsed == h and end == len(raw)


@pytest.mark.parametrize("mode,F", [(0, 12), (1, 0)])
def test_header_mode_F_consistency(mode, F):
    with pytest.raises(ConfigurationError):
        ContainerHeader(mode, 10, 256, F)


def test_header_rejections():
    good = ContainerHeader(0, 10, 256).pack()
    with pytest.raises(CorruptStreamError):
        ContainerHeader.unpack(b"XXXX" + good[4:])
    with pytest.raises(CorruptStreamError):
        ContainerHeader.unpack(good[:4] + b"\x02" + good[5:])
    with pytest.raises(CorruptStreamError):
        ContainerHeader.unpack(good[:10])
    with pytest.raises(CorruptStreamError):
        ContainerHeader.unpack(good[:18] + b"\x0c" + good[19:])


@pytest.mark.parametrize("alphabet", ["auto", "bytes"])
@pytest.mark.parametrize("policy", [None, LengthPolicy.length_limited(12)])
def test_container_roundtrip(sample, alphabet, policy):
    _, data = sample
    blob, stats = encode_chunks(data, None, policy=policy, alphabet=alphabet)
    assert decode_all(blob)[0] == data


def test_single_byte_input_gets_companion_symbol():
    blob, _ = encode_container(b"zzzz")
    header, _ = ContainerHeader.unpack(blob)
    assert header.symbols == (0, ord("z"))
    assert decode_all(blob)[0] == b"zzzz"


def test_encode_decode_files(sample, tmp_path, capsys):
    path, data = sample
    assert run("encode", path, tmp_path / "c.apc") == 0
    err = capsys.readouterr().err
    assert "bits_per_symbol=" in err and "max_steps_per_symbol=" in err
    assert run("decode", tmp_path / "c.apc", tmp_path / "out") == 0
    assert (tmp_path / "out").read_bytes() == data
    assert (tmp_path / "c.apc").stat().st_size < len(data)


def test_chunked_and_length_limited(sample, tmp_path):
    path, data = sample
    out = tmp_path / "c.apc"
    assert run("encode", path, out, "--mode", "ll", "--max-len", 12, "--chunk", 3000) == 0
    blob = out.read_bytes()
    assert blob.count(MAGIC) >= 7
    assert run("decode", out, tmp_path / "back") == 0
    assert (tmp_path / "back").read_bytes() == data


def test_stdin_stdout(sample, monkeypatch, capsysbinary):
    _, data = sample
    monkeypatch.setattr(sys, "stdin", io.TextIOWrapper(io.BytesIO(data)))
    assert run("encode", "-", "-") == 0
    blob = capsysbinary.readouterr().out
    monkeypatch.setattr(sys, "stdin", io.TextIOWrapper(io.BytesIO(blob)))
    assert run("decode", "-", "-") == 0
    assert capsysbinary.readouterr().out == data


def test_usage_errors(sample, tmp_path):
    path, _ = sample
    with pytest.raises(SystemExit) as exc:
        run("encode")
    assert exc.value.code == 1
    assert run("encode", path, tmp_path / "x", "--mode", "ll") == 1
    assert run("encode", path, tmp_path / "x", "--max-len", 9) == 1
    assert run("encode", path, tmp_path / "x", "--mode", "ll", "--max-len", 8,
               "--alphabet", "bytes") == 1
    empty = tmp_path / "empty"
    empty.write_bytes(b"")
    assert run("encode", empty, tmp_path / "x") == 1


def test_data_errors(sample, tmp_path):
    path, _ = sample
    assert run("decode", tmp_path / "missing", tmp_path / "x") == 2
    bad = tmp_path / "bad"
    bad.write_bytes(b"NOPE" + bytes(40))
    assert run("decode", bad, tmp_path / "x") == 2
    header_only = tmp_path / "h"
    header_only.write_bytes(ContainerHeader(0, 100, 256).pack())
    assert run("decode", header_only, tmp_path / "x") == 2
    empty = tmp_path / "empty"
    empty.write_bytes(b"")
    assert run("decode", empty, tmp_path / "x") == 2


def test_tampered_payload_never_crashes(sample, tmp_path):
    path, data = sample
    run("encode", path, tmp_path / "c.apc")
    blob = (tmp_path / "c.apc").read_bytes()
    rng = random.Random(5)
    for _ in range(25):
        bad = bytearray(blob)
        i = rng.randrange(HEADER.size + 4 * 100, len(bad))
        bad[i] ^= 1 << rng.randrange(8)
        (tmp_path / "t").write_bytes(bad)
        code = run("decode", tmp_path / "t", tmp_path / "o")
        assert code in (0, 2)
        if code == 0:
            assert len((tmp_path / "o").read_bytes()) == len(data)


def test_sort_command(tmp_path, capsys):
    src = tmp_path / "s"
    src.write_bytes(b"banana")
    assert run("sort", src, tmp_path / "p") == 0
    assert (tmp_path / "p").read_text().split() == ["1", "3", "5", "0", "2", "4"]
    err = capsys.readouterr().err
    assert "comparisons=" in err and "H_plus_2=" in err
    src.write_bytes(bytes(range(50)))
    assert run("sort", src, tmp_path / "p") == 0
    assert (tmp_path / "p").read_text().split() == [str(i) for i in range(50)]


def test_bench_report(tmp_path, sample):
    path, _ = sample
    report = tmp_path / "r.txt"
    assert run("bench", path.parent, "--sizes", "2^10,2^12", "--alphabets", "2,16",
               "--theorem2", 5, "--report", report) == 0
    text = report.read_text()
    assert "H_plus_1=" in text and "bits_per_symbol=" in text
    assert "constant_budget=1" in text and "failures=0" in text
    assert "[file in.bin]" in text and "[theorem2 ell=5]" in text


def test_console_script(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "adaptive_prefix.cli", "--help"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and "encode" in proc.stdout
