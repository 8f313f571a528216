"""Run-config parsing and the four command-line entry points."""

import os

import numpy as np
import pytest

from spanseg.checkpoint import load_model
from spanseg.cli import main
from spanseg.config import load_config, model_config, parse_config_text, require
from spanseg.errors import ConfigError

FIG1_GOLD = "học_sinh học sinh_học\n"
FIG1_INPUT = "học sinh học sinh học\n"


def write(path, text):
    path.write_text(text, encoding="utf-8")
    return str(path)


class TestConfigParsing:
    def test_pairs_comments_and_blanks(self):
        text = "# run setup\nseed = 4\n\ntrain=data.txt  # corpus\n"
        assert parse_config_text(text) == {"seed": "4", "train": "data.txt"}

    def test_value_may_contain_spaces(self):
        assert parse_config_text("train = my corpus.txt\n") == {"train": "my corpus.txt"}

    def test_unknown_key_rejected_with_line(self):
        with pytest.raises(ConfigError, match="line 2: unknown config key 'sede'"):
            parse_config_text("seed = 4\nsede = 5\n")

    def test_duplicate_key_rejected_with_line(self):
        with pytest.raises(ConfigError, match="line 3: duplicate"):
            parse_config_text("seed = 4\n\nseed = 5\n")

    def test_empty_value_rejected(self):
        with pytest.raises(ConfigError, match="empty value"):
            parse_config_text("seed =\n")

    def test_missing_separator_rejected(self):
        with pytest.raises(ConfigError, match="key=value"):
            parse_config_text("seed 4\n")

    def test_require_reports_missing_key(self):
        with pytest.raises(ConfigError, match="missing required config key 'dev'"):
            require({"seed": "4"}, "dev")

    def test_model_config_overrides_win(self):
        config = model_config({"seed": "4", "train": "x"}, {"seed": "9"})
        assert config.seed == 9

    def test_load_config_reads_file(self, tmp_path):
        path = write(tmp_path / "run.cfg", "seed = 4\n")
        assert load_config(path) == {"seed": "4"}


SMALL_DIMS = """
d_static = 6
d_dynamic = 6
d_char = 4
d_char_emb = 3
layers = 1
hidden = 5
mlp_dim = 4
dropout = 0.0
seed = 11
"""

TRAIN_TEXT = "a_b c\nc a_b\na_b a_b\nc c a_b\na_b c c\nc a_b c\n"


def train_config(tmp_path, system="spanseg", extra="", drop=()):
    train = write(tmp_path / "train.txt", TRAIN_TEXT)
    dev = write(tmp_path / "dev.txt", TRAIN_TEXT)
    ckpt = str(tmp_path / "model.ckpt")
    lines = {
        "system": system,
        "language": "vietnamese",
        "train": train,
        "dev": dev,
        "checkpoint": ckpt,
        "max_epochs": "3",
        "patience": "3",
    }
    for key in drop:
        lines.pop(key)
    body = "".join(f"{k} = {v}\n" for k, v in lines.items()) + SMALL_DIMS + extra
    return write(tmp_path / "run.cfg", body), ckpt


class TestTrainCommand:
    def test_trains_and_writes_artifacts(self, tmp_path, capsys):
        cfg, ckpt = train_config(tmp_path)
        assert main(["train", cfg]) == 0
        assert os.path.exists(ckpt)
        assert os.path.exists(ckpt + ".bin")
        assert os.path.exists(ckpt + ".curves.png")
        log_lines = open(ckpt + ".log", encoding="utf-8").read().splitlines()
        assert log_lines[0].startswith("# loss: ")
        assert log_lines[1].startswith("epoch 1 loss ")
        assert "trained spanseg" in capsys.readouterr().err

    def test_crf_system_recorded_in_manifest(self, tmp_path):
        cfg, ckpt = train_config(tmp_path, system="crf")
        assert main(["train", cfg]) == 0
        assert "system crf" in open(ckpt, encoding="utf-8").read().splitlines()

    def test_custom_log_path(self, tmp_path):
        log = str(tmp_path / "run.log")
        cfg, ckpt = train_config(tmp_path, extra=f"log = {log}\n")
        assert main(["train", cfg]) == 0
        assert os.path.exists(log)
        assert not os.path.exists(ckpt + ".log")

    def test_missing_dev_key_fails(self, tmp_path, capsys):
        cfg, _ = train_config(tmp_path, drop=("dev",))
        assert main(["train", cfg]) == 1
        err = capsys.readouterr().err
        assert err.startswith("error: ")
        assert "dev" in err

    def test_unknown_system_fails(self, tmp_path, capsys):
        cfg, _ = train_config(tmp_path, system="oracle")
        assert main(["train", cfg]) == 1
        assert "system" in capsys.readouterr().err

    def test_empty_training_corpus_fails(self, tmp_path, capsys):
        cfg, _ = train_config(tmp_path)
        write(tmp_path / "train.txt", "")
        assert main(["train", cfg]) == 1
        assert "empty" in capsys.readouterr().err

    def test_env_seed_overrides_config(self, tmp_path, monkeypatch):
        cfg, ckpt = train_config(tmp_path)
        monkeypatch.setenv("SPANSEG_SEED", "123")
        assert main(["train", cfg]) == 0
        model, _, _ = load_model(ckpt)
        assert model.config.seed == 123

    def test_seed_from_config_without_env(self, tmp_path, monkeypatch):
        cfg, ckpt = train_config(tmp_path)
        monkeypatch.delenv("SPANSEG_SEED", raising=False)
        assert main(["train", cfg]) == 0
        model, _, _ = load_model(ckpt)
        assert model.config.seed == 11


def oracle_config(tmp_path, gold_text, language="vietnamese"):
    gold = write(tmp_path / "gold.txt", gold_text)
    body = f"system = oracle\nlanguage = {language}\noracle_gold = {gold}\n"
    return write(tmp_path / "oracle.cfg", body)


class TestSegmentCommand:
    def test_oracle_reproduces_gold(self, tmp_path):
        cfg = oracle_config(tmp_path, FIG1_GOLD)
        inp = write(tmp_path / "in.txt", FIG1_INPUT)
        out = str(tmp_path / "out.txt")
        assert main(["segment", cfg, inp, out]) == 0
        assert open(out, encoding="utf-8").read() == FIG1_GOLD

    def test_oracle_chinese(self, tmp_path):
        cfg = oracle_config(tmp_path, "中国 人\n", language="chinese")
        inp = write(tmp_path / "in.txt", "中国人\n")
        out = str(tmp_path / "out.txt")
        assert main(["segment", cfg, inp, out]) == 0
        assert open(out, encoding="utf-8").read() == "中国 人\n"

    def test_oracle_multi_sentence(self, tmp_path):
        cfg = oracle_config(tmp_path, "a_b c\nd_d_d\n")
        inp = write(tmp_path / "in.txt", "a b c\nd d d\n")
        out = str(tmp_path / "out.txt")
        assert main(["segment", cfg, inp, out]) == 0
        assert open(out, encoding="utf-8").read() == "a_b c\nd_d_d\n"

    def test_empty_input_gives_empty_output(self, tmp_path):
        cfg = oracle_config(tmp_path, "")
        inp = write(tmp_path / "in.txt", "")
        out = str(tmp_path / "out.txt")
        assert main(["segment", cfg, inp, out]) == 0
        assert open(out, encoding="utf-8").read() == ""

    def test_rerun_is_byte_identical(self, tmp_path):
        cfg = oracle_config(tmp_path, FIG1_GOLD)
        inp = write(tmp_path / "in.txt", FIG1_INPUT)
        out_a = str(tmp_path / "a.txt")
        out_b = str(tmp_path / "b.txt")
        assert main(["segment", cfg, inp, out_a]) == 0
        assert main(["segment", cfg, inp, out_b]) == 0
        assert open(out_a, "rb").read() == open(out_b, "rb").read()

    def test_oracle_token_mismatch_fails(self, tmp_path, capsys):
        cfg = oracle_config(tmp_path, "a_b c\n")
        inp = write(tmp_path / "in.txt", "a b d\n")
        assert main(["segment", cfg, inp, str(tmp_path / "out.txt")]) == 1
        assert "do not match" in capsys.readouterr().err

    def test_oracle_sentence_count_mismatch_fails(self, tmp_path, capsys):
        cfg = oracle_config(tmp_path, "a_b c\n")
        inp = write(tmp_path / "in.txt", "a b c\na b c\n")
        assert main(["segment", cfg, inp, str(tmp_path / "out.txt")]) == 1
        assert "sentences" in capsys.readouterr().err

    def test_empty_line_in_input_fails(self, tmp_path, capsys):
        cfg = oracle_config(tmp_path, "a_b c\n")
        inp = write(tmp_path / "in.txt", "\n")
        assert main(["segment", cfg, inp, str(tmp_path / "out.txt")]) == 1
        assert "empty sentence" in capsys.readouterr().err

    def test_chinese_input_with_space_fails(self, tmp_path, capsys):
        cfg = oracle_config(tmp_path, "中国 人\n", language="chinese")
        inp = write(tmp_path / "in.txt", "中国 人\n")
        assert main(["segment", cfg, inp, str(tmp_path / "out.txt")]) == 1
        assert "must not contain spaces" in capsys.readouterr().err

    def test_trained_checkpoint_segments_clean_partition(self, tmp_path):
        cfg, ckpt = train_config(tmp_path)
        assert main(["train", cfg]) == 0
        seg_cfg = write(tmp_path / "seg.cfg", f"checkpoint = {ckpt}\n")
        inp = write(tmp_path / "in.txt", "a b c\nc c\n")
        out = str(tmp_path / "out.txt")
        assert main(["segment", seg_cfg, inp, out]) == 0
        out_lines = open(out, encoding="utf-8").read().splitlines()
        assert len(out_lines) == 2
        for got, src in zip(out_lines, ["a b c", "c c"]):
            assert got.replace("_", " ") == src


def ctx_file_for(tmp_path, name, token_counts, dim=4):
    lines = []
    for i, k in enumerate(token_counts):
        n = k + 2
        lines.append(f"# {i} {n} {dim}")
        for r in range(n):
            lines.append(" ".join(f"{(i + 1) * (r + 1) / 10 + c / 100:.4f}" for c in range(dim)))
        lines.append("")
    return write(tmp_path / name, "\n".join(lines) + "\n")


TRAIN_TOKEN_COUNTS = [3, 3, 4, 4, 4, 4]


class TestFeatureInputs:
    def test_chunked_ctx_dim_inferred_and_segmentable(self, tmp_path):
        ctx = ctx_file_for(tmp_path, "train.ctx", TRAIN_TOKEN_COUNTS)
        extra = (
            "encoder_mode = chunked_ctx\n"
            f"ctx_file = {ctx}\n"
            f"dev_ctx_file = {ctx}\n"
        )
        cfg, ckpt = train_config(tmp_path, extra=extra)
        assert main(["train", cfg]) == 0
        model, _, _ = load_model(ckpt)
        assert model.config.encoder_mode == "chunked_ctx"
        assert model.config.d_ctx == 4

        seg_ctx = ctx_file_for(tmp_path, "seg.ctx", [3])
        seg_cfg = write(
            tmp_path / "seg.cfg", f"checkpoint = {ckpt}\nctx_file = {seg_ctx}\n"
        )
        inp = write(tmp_path / "in.txt", "a b c\n")
        out = str(tmp_path / "out.txt")
        assert main(["segment", seg_cfg, inp, out]) == 0
        line = open(out, encoding="utf-8").read().strip()
        assert line.replace("_", " ") == "a b c"

    def test_static_embeddings_frozen_into_checkpoint(self, tmp_path):
        emb = write(
            tmp_path / "emb.txt",
            "2 6\na 1 2 3 4 5 6\nc 0.5 0.5 0.5 0.5 0.5 0.5\n",
        )
        cfg, ckpt = train_config(tmp_path, extra=f"static_emb = {emb}\n")
        assert main(["train", cfg]) == 0
        assert "param static.table " in open(ckpt, encoding="utf-8").read()
        model, _, _ = load_model(ckpt)
        row = model.encoder.static_matrix[model.vocab.token_to_id["a"]]
        assert np.array_equal(row, np.array([1.0, 2.0, 3.0, 4.0, 5.0, 6.0]))

    def test_static_dim_mismatch_fails(self, tmp_path, capsys):
        emb = write(tmp_path / "emb.txt", "1 3\na 1 2 3\n")
        cfg, _ = train_config(tmp_path, extra=f"static_emb = {emb}\n")
        assert main(["train", cfg]) == 1
        assert "static embeddings have dim 3" in capsys.readouterr().err

    def test_use_tag_requires_tag_file(self, tmp_path, capsys):
        cfg, _ = train_config(tmp_path, extra="use_tag = true\n")
        assert main(["train", cfg]) == 1
        assert "tag_file" in capsys.readouterr().err

    def test_tag_features_train_and_segment(self, tmp_path):
        tag_lines = "".join("S " * k + "\n" for k in TRAIN_TOKEN_COUNTS)
        tags = write(tmp_path / "train.tags", tag_lines)
        extra = f"use_tag = true\ntag_file = {tags}\ndev_tag_file = {tags}\n"
        cfg, ckpt = train_config(tmp_path, extra=extra)
        assert main(["train", cfg]) == 0
        seg_tags = write(tmp_path / "seg.tags", "B I E\n")
        seg_cfg = write(
            tmp_path / "seg.cfg", f"checkpoint = {ckpt}\ntag_file = {seg_tags}\n"
        )
        inp = write(tmp_path / "in.txt", "a b c\n")
        out = str(tmp_path / "out.txt")
        assert main(["segment", seg_cfg, inp, out]) == 0
        line = open(out, encoding="utf-8").read().strip()
        assert line.replace("_", " ") == "a b c"

    def test_oracle_has_no_width_cap(self, tmp_path):
        word = "_".join(["a"] * 9)
        cfg = oracle_config(tmp_path, word + "\n")
        inp = write(tmp_path / "in.txt", " ".join(["a"] * 9) + "\n")
        out = str(tmp_path / "out.txt")
        assert main(["segment", cfg, inp, out]) == 0
        assert open(out, encoding="utf-8").read() == word + "\n"


GOLD_13 = "a_b c d\n"
PRED_13 = "a b_c d\n"


class TestEvalCommand:
    def test_perfect_prediction_scores_100(self, tmp_path, capsys):
        gold = write(tmp_path / "gold.txt", GOLD_13)
        assert main(["eval", gold, gold]) == 0
        out = capsys.readouterr().out
        assert "precision 100.00" in out
        assert "f1        100.00" in out
        assert "oov_recall" not in out

    def test_one_third_fixture(self, tmp_path, capsys):
        gold = write(tmp_path / "gold.txt", GOLD_13)
        pred = write(tmp_path / "pred.txt", PRED_13)
        assert main(["eval", gold, pred]) == 0
        out = capsys.readouterr().out
        assert "precision 33.33" in out
        assert "recall    33.33" in out
        assert "f1        33.33" in out
        assert "matched 1  gold 3  predicted 3" in out

    def test_train_arg_enables_oov_recall(self, tmp_path, capsys):
        gold = write(tmp_path / "gold.txt", "a_b c\nd c\n")
        train = write(tmp_path / "train.txt", "a_b c\n")
        assert main(["eval", gold, gold, train]) == 0
        assert "oov_recall 100.00" in capsys.readouterr().out

    def test_full_train_coverage_shows_na(self, tmp_path, capsys):
        gold = write(tmp_path / "gold.txt", GOLD_13)
        train = write(tmp_path / "train.txt", "a_b d c\n")
        assert main(["eval", gold, gold, train]) == 0
        assert "oov_recall n/a" in capsys.readouterr().out

    def test_chinese_language_flag(self, tmp_path, capsys):
        gold = write(tmp_path / "gold.txt", "中国 人\n")
        assert main(["eval", gold, gold, "--lang", "chinese"]) == 0
        assert "f1        100.00" in capsys.readouterr().out

    def test_report_dir_written(self, tmp_path, capsys):
        gold = write(tmp_path / "gold.txt", GOLD_13)
        pred = write(tmp_path / "pred.txt", PRED_13)
        report = str(tmp_path / "report")
        assert main(["eval", gold, pred, "--report", report]) == 0
        text = open(os.path.join(report, "report.txt"), encoding="utf-8").read()
        assert text == capsys.readouterr().out
        tsv = open(os.path.join(report, "report.tsv"), encoding="utf-8").read()
        assert "f1\t33.33\n" in tsv
        assert os.path.getsize(os.path.join(report, "report.png")) > 0

    def test_token_mismatch_fails(self, tmp_path, capsys):
        gold = write(tmp_path / "gold.txt", "a_b c\n")
        pred = write(tmp_path / "pred.txt", "a_b c d\n")
        assert main(["eval", gold, pred]) == 1
        assert capsys.readouterr().err.startswith("error: ")

    def test_missing_file_fails(self, tmp_path, capsys):
        gold = write(tmp_path / "gold.txt", GOLD_13)
        assert main(["eval", gold, str(tmp_path / "nope.txt")]) == 1
        assert "error: " in capsys.readouterr().err


ANALYZE_GOLD = "a b_c d\na_b c d\n"
ANALYZE_OTHER = "a_b c d\na b_c d\n"


class TestAnalyzeCommand:
    def test_first_right_second_wrong(self, tmp_path, capsys):
        gold = write(tmp_path / "gold.txt", ANALYZE_GOLD)
        b = write(tmp_path / "b.txt", ANALYZE_OTHER)
        report = str(tmp_path / "report")
        assert main(["analyze", gold, gold, b, "--report", report]) == 0
        out = capsys.readouterr().out
        assert f"{'✓ ✗':<6} {1:>10} {1:>10} {2:>7}" in out
        tsv = open(os.path.join(report, "report.tsv"), encoding="utf-8").read()
        assert "BES.a_right_b_wrong\t1\n" in tsv
        assert "SBE.a_right_b_wrong\t1\n" in tsv
        assert "BES.both_right\t0\n" in tsv
        assert os.path.getsize(os.path.join(report, "report.png")) > 0

    def test_all_equal_counts_nothing_wrong(self, tmp_path, capsys):
        gold = write(tmp_path / "gold.txt", "a b_c d\n")
        assert main(["analyze", gold, gold, gold]) == 0
        for line in capsys.readouterr().out.splitlines()[1:]:
            assert line.endswith("0")

    def test_sentence_count_mismatch_fails(self, tmp_path, capsys):
        gold = write(tmp_path / "gold.txt", "a b\nc d\n")
        b = write(tmp_path / "b.txt", "a b\n")
        assert main(["analyze", gold, gold, b]) == 1
        assert "second prediction" in capsys.readouterr().err
