"""Shared fixtures.

The expensive objects (trained codecs, a trained driving model, fitted
attribute readout) are session-scoped so the suite trains each of them once.
"""

import pytest

from facemotion.driving import DrivingConfig, TrainerConfig, train
from facemotion.llm import MockClient
from facemotion.protocol import Vocabulary
from facemotion.synthetic import (build_grammar_corpus, make_label_readout,
                                  train_grammar_codecs)


@pytest.fixture(scope="session")
def grammar_codecs():
    return train_grammar_codecs()


@pytest.fixture(scope="session")
def small_split(grammar_codecs):
    return build_grammar_corpus(grammar_codecs, n_train=48, n_heldout=12, seed=0)


def _vocab_for(split):
    from facemotion.driving import TextTokenizer

    tok = TextTokenizer.from_corpus(split.descriptions)
    return Vocabulary(text_size=tok.size, n_expr=512, n_pose=512), tok


@pytest.fixture(scope="session")
def masked_model(small_split):
    """1-layer model trained with the pose/expression mask on.

    Lightly trained: the invariance property it exists to exercise holds for
    any weights, so convergence is not needed here.
    """
    vocab, tok = _vocab_for(small_split)
    model, log = train(
        small_split.train, vocab, text_tokenizer=tok,
        model_config=DrivingConfig(n_layers=1, n_heads=4, d_model=96,
                                   context_length=48, seed=0),
        trainer_config=TrainerConfig(epochs=40, batch_size=16))
    return model, log


@pytest.fixture(scope="session")
def memorized_model(small_split):
    """2-layer model trained to exact recall of six grammar pairs."""
    from facemotion.driving import TextTokenizer

    pairs = small_split.train[:6]
    tok = TextTokenizer.from_corpus(p.description for p in pairs)
    vocab = Vocabulary(text_size=tok.size, n_expr=512, n_pose=512)
    model, log = train(
        pairs, vocab, text_tokenizer=tok,
        model_config=DrivingConfig(n_layers=2, n_heads=4, d_model=128,
                                   context_length=48, seed=0),
        trainer_config=TrainerConfig(epochs=150, batch_size=8,
                                     learning_rate=1e-3))
    return model, log, pairs


@pytest.fixture(scope="session")
def unmasked_model(small_split):
    """Ablation twin: same data, pose/expression mask off."""
    vocab, tok = _vocab_for(small_split)
    model, _ = train(
        small_split.train, vocab, text_tokenizer=tok,
        model_config=DrivingConfig(n_layers=1, n_heads=4, d_model=96,
                                   context_length=48, seed=0,
                                   use_pose_expr_mask=False),
        trainer_config=TrainerConfig(epochs=20, batch_size=16))
    return model


@pytest.fixture(scope="session")
def label_readout():
    return make_label_readout(seed=0)


@pytest.fixture()
def mock_client(tmp_path):
    return MockClient(cache_dir=tmp_path / "llm_cache")


@pytest.fixture()
def uncached_client():
    return MockClient()
