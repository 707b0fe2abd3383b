import pytest

from shiftparse.cli import main
from shiftparse.evalmetrics import score_dep
from shiftparse.trees import read_conll, write_brackets, write_conll
from shiftparse import synth

FAST_FLAGS = ["--word-dims", "8", "--tag-dims", "6", "--lstm-units", "8",
              "--hidden", "8", "--epochs", "2", "--minibatch", "4",
              "--dropout", "0.0", "--word-dropout", "0.0",
              "--min-form-count", "1", "--seed", "1"]


@pytest.fixture()
def dep_corpus(tmp_path):
    path = tmp_path / "train.conll"
    path.write_text(write_conll(synth.toy_dep_corpus(12, seed=7)), encoding="utf-8")
    return path


@pytest.fixture()
def const_corpus(tmp_path):
    path = tmp_path / "train.brackets"
    path.write_text(write_brackets(synth.toy_const_corpus(12, seed=7)), encoding="utf-8")
    return path


def test_train_writes_model_and_log(tmp_path, dep_corpus):
    model = tmp_path / "dep.model"
    log = tmp_path / "train.log"
    code = main(["train", "--task", "dep", "--train", str(dep_corpus),
                 "--model", str(model), "--log", str(log)] + FAST_FLAGS)
    assert code == 0
    assert model.exists() and (tmp_path / "dep.model.best").exists()
    content = log.read_text()
    assert "config epochs=2" in content
    assert "epoch=2 loss=" in content


def test_train_same_seed_identical_logs_and_models(tmp_path, dep_corpus):
    outputs = []
    for tag in ("a", "b"):
        model = tmp_path / ("model_%s" % tag)
        log = tmp_path / ("log_%s" % tag)
        assert main(["train", "--task", "dep", "--train", str(dep_corpus),
                     "--model", str(model), "--log", str(log)] + FAST_FLAGS) == 0
        outputs.append((log.read_bytes(), model.read_bytes()))
    assert outputs[0][0] == outputs[1][0]
    assert outputs[0][1] == outputs[1][1]


def test_train_missing_path_is_usage_error(tmp_path):
    with pytest.raises(SystemExit) as exc:
        main(["train", "--task", "dep", "--model", str(tmp_path / "m")])
    assert exc.value.code == 1


def test_unreadable_train_file_is_data_error(tmp_path):
    code = main(["train", "--task", "dep", "--train", str(tmp_path / "missing"),
                 "--model", str(tmp_path / "m")] + FAST_FLAGS)
    assert code == 2


def test_config_file_and_flag_precedence(tmp_path, dep_corpus):
    config = tmp_path / "run.cfg"
    config.write_text("epochs=1\nlstm_units=8\n", encoding="utf-8")
    model = tmp_path / "m"
    log = tmp_path / "log"
    code = main(["train", "--task", "dep", "--train", str(dep_corpus),
                 "--model", str(model), "--log", str(log), "--config", str(config),
                 "--word-dims", "8", "--tag-dims", "6", "--hidden", "8",
                 "--minibatch", "4", "--dropout", "0.0", "--word-dropout", "0.0",
                 "--min-form-count", "1", "--seed", "1", "--epochs", "2"])
    assert code == 0
    content = log.read_text()
    assert "config epochs=2" in content       # flag beats config file
    assert "config lstm_units=8" in content   # config file beats default


def test_parse_pipeline_matches_eval(tmp_path, dep_corpus, capsys):
    model = tmp_path / "dep.model"
    assert main(["train", "--task", "dep", "--train", str(dep_corpus),
                 "--model", str(model), "--log", str(tmp_path / "log"),
                 "--epochs", "8", "--minibatch", "1"] + FAST_FLAGS[:-4] +
                ["--min-form-count", "1", "--seed", "1"]) == 0
    out = tmp_path / "pred.conll"
    assert main(["parse", "--task", "dep", "--model", str(model),
                 "--input", str(dep_corpus), "--output", str(out)]) == 0
    capsys.readouterr()
    assert main(["eval", "--task", "dep", "--gold", str(dep_corpus),
                 "--pred", str(out), "--include-punct"]) == 0
    printed = capsys.readouterr().out
    gold = read_conll(dep_corpus.read_text())
    pred = read_conll(out.read_text())
    expected = score_dep(gold, pred, exclude_punct=False)
    assert ("uas=%.2f" % expected.uas) in printed
    assert ("las=%.2f" % expected.las) in printed


def test_parse_empty_input(tmp_path, dep_corpus):
    model = tmp_path / "dep.model"
    assert main(["train", "--task", "dep", "--train", str(dep_corpus),
                 "--model", str(model)] + FAST_FLAGS) == 0
    empty = tmp_path / "empty.conll"
    empty.write_text("", encoding="utf-8")
    out = tmp_path / "out.conll"
    assert main(["parse", "--task", "dep", "--model", str(model),
                 "--input", str(empty), "--output", str(out)]) == 0
    assert out.read_text() == ""


def test_parse_task_mismatch(tmp_path, dep_corpus, capsys):
    model = tmp_path / "dep.model"
    assert main(["train", "--task", "dep", "--train", str(dep_corpus),
                 "--model", str(model)] + FAST_FLAGS) == 0
    code = main(["parse", "--task", "const", "--model", str(model),
                 "--input", str(dep_corpus)])
    assert code == 2
    assert "task mismatch" in capsys.readouterr().err


def test_parse_threads_preserve_order(tmp_path, dep_corpus):
    model = tmp_path / "dep.model"
    assert main(["train", "--task", "dep", "--train", str(dep_corpus),
                 "--model", str(model)] + FAST_FLAGS) == 0
    serial = tmp_path / "serial.conll"
    threaded = tmp_path / "threaded.conll"
    assert main(["parse", "--task", "dep", "--model", str(model),
                 "--input", str(dep_corpus), "--output", str(serial)]) == 0
    assert main(["parse", "--task", "dep", "--model", str(model),
                 "--input", str(dep_corpus), "--output", str(threaded),
                 "--threads", "4"]) == 0
    assert serial.read_text() == threaded.read_text()


def test_eval_identical_files(tmp_path, dep_corpus, capsys):
    assert main(["eval", "--task", "dep", "--gold", str(dep_corpus),
                 "--pred", str(dep_corpus)]) == 0
    out = capsys.readouterr().out
    assert "uas=100.00" in out and "las=100.00" in out


def test_eval_hand_counted_example(tmp_path, capsys):
    gold = ("1\tI\t_\t_\tPRP\t_\t2\tnsubj\t_\t_\n"
            "2\tlike\t_\t_\tVBP\t_\t0\troot\t_\t_\n"
            "3\tsports\t_\t_\tNNS\t_\t2\tdobj\t_\t_\n")
    pred = ("1\tI\t_\t_\tPRP\t_\t3\tnsubj\t_\t_\n"
            "2\tlike\t_\t_\tVBP\t_\t0\troot\t_\t_\n"
            "3\tsports\t_\t_\tNNS\t_\t2\tdobj\t_\t_\n")
    g = tmp_path / "g.conll"
    p = tmp_path / "p.conll"
    g.write_text(gold, encoding="utf-8")
    p.write_text(pred, encoding="utf-8")
    assert main(["eval", "--task", "dep", "--gold", str(g), "--pred", str(p),
                 "--include-punct"]) == 0
    assert "uas=66.67" in capsys.readouterr().out


def test_train_defaults_echoed_in_log(tmp_path, dep_corpus):
    model = tmp_path / "m"
    log = tmp_path / "log"
    code = main(["train", "--task", "dep", "--train", str(dep_corpus),
                 "--model", str(model), "--log", str(log),
                 "--epochs", "1", "--min-form-count", "1"])
    assert code == 0
    content = log.read_text()
    for line in ("config word_dims=50", "config tag_dims=20",
                 "config lstm_units=200", "config hidden=200",
                 "config minibatch=10", "config dropout=0.5",
                 "config rho=0.99", "config eps=1e-07", "config l2=0.0"):
        assert line in content, line


def test_eval_custom_punct_tags(tmp_path, capsys):
    block = ("1\thi\t_\t_\tUH\t_\t0\troot\t_\t_\n"
             "2\tthere\t_\t_\tRB\t_\t1\tadvmod\t_\t_\n")
    path = tmp_path / "g.conll"
    path.write_text(block, encoding="utf-8")
    assert main(["eval", "--task", "dep", "--gold", str(path), "--pred", str(path),
                 "--punct-tags", "RB"]) == 0
    assert "scored=1" in capsys.readouterr().out


def test_eval_recall_csv(tmp_path, dep_corpus, capsys):
    csv = tmp_path / "recall.csv"
    assert main(["eval", "--task", "dep", "--gold", str(dep_corpus),
                 "--pred", str(dep_corpus), "--recall-by-length", str(csv),
                 "--max-bucket", "5"]) == 0
    lines = csv.read_text().strip().splitlines()
    assert lines[0] == "length,gold,correct,recall"
    assert len(lines) - 1 <= 5 + 1   # numeric buckets plus the root bucket


def test_eval_const(tmp_path, const_corpus, capsys):
    assert main(["eval", "--task", "const", "--gold", str(const_corpus),
                 "--pred", str(const_corpus)]) == 0
    out = capsys.readouterr().out
    assert "f1=100.00" in out


def test_oracle_example_sentence(tmp_path, capsys):
    brackets = tmp_path / "fig.brackets"
    brackets.write_text("(S (NP (PRP I)) (VP (VBP like) (NP (NNS sports))))\n",
                        encoding="utf-8")
    out = tmp_path / "actions.txt"
    assert main(["oracle", "--task", "const", "--input", str(brackets),
                 "--output", str(out), "--replay"]) == 0
    assert out.read_text().strip().splitlines() == [
        "SHIFT", "PRO:NP", "SHIFT", "PRO:VP", "SHIFT", "PRO:NP",
        "ADJ-R", "PRO:S", "ADJ-L"]
    assert "0 mismatches" in capsys.readouterr().err


def test_oracle_replay_clean_on_treebank(tmp_path, dep_corpus, capsys):
    assert main(["oracle", "--task", "dep", "--input", str(dep_corpus),
                 "--replay"]) == 0
    assert "0 mismatches" in capsys.readouterr().err


def test_oracle_skips_nonprojective(tmp_path, capsys):
    crossing = ("1\ta\t_\t_\tA\t_\t3\tdep\t_\t_\n"
                "2\tb\t_\t_\tB\t_\t0\troot\t_\t_\n"
                "3\tc\t_\t_\tC\t_\t2\tdep\t_\t_\n")
    path = tmp_path / "np.conll"
    path.write_text(crossing, encoding="utf-8")
    assert main(["oracle", "--task", "dep", "--input", str(path), "--replay"]) == 0
    err = capsys.readouterr().err
    assert "skipped sentence 1" in err


def test_gradcheck_default_passes(capsys):
    assert main(["gradcheck", "--task", "dep", "--samples", "2"]) == 0
    out = capsys.readouterr().out
    assert "max relative error" in out


def test_gradcheck_float32_relaxed(capsys):
    assert main(["gradcheck", "--task", "dep", "--samples", "2",
                 "--precision", "float32"]) == 0


def test_gradcheck_injected_error_fails(capsys):
    code = main(["gradcheck", "--task", "dep", "--samples", "2",
                 "--inject-error", "emb.word"])
    assert code == 3
    assert "emb.word" in capsys.readouterr().out


def test_usage_error_exit_code():
    with pytest.raises(SystemExit) as exc:
        main(["parse", "--task", "bogus"])
    assert exc.value.code == 1


def test_const_train_and_parse_from_text(tmp_path, const_corpus):
    model = tmp_path / "const.model"
    assert main(["train", "--task", "const", "--train", str(const_corpus),
                 "--model", str(model), "--nonterminal-dims", "8"] + FAST_FLAGS) == 0
    text = tmp_path / "input.txt"
    text.write_text("the/DT dog/NN sees/VBZ a/DT cat/NN\n", encoding="utf-8")
    out = tmp_path / "pred.brackets"
    assert main(["parse", "--task", "const", "--model", str(model),
                 "--input", str(text), "--input-format", "text",
                 "--output", str(out)]) == 0
    assert out.read_text().startswith("(")
