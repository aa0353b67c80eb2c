"""EDA operations, MLM mask-and-replace, external import, composition."""

from collections import Counter

import numpy as np
import pytest

from textsmooth.augmenters import (
    EdaConfig,
    compose_with_smoothing,
    eda_augment,
    import_external,
    load_synonym_table,
    mlm_replace_augment,
    smoothing_stream,
    write_augmented_tsv,
)
from textsmooth.backends import MicroBackend
from textsmooth.backends.micro import MICRO_VOCAB, MicroConfig, zero_micro_weights
from textsmooth.errors import (
    ConfigError,
    EmptyDataset,
    EmptyText,
    LambdaOutOfRange,
    MissingFile,
    NoSynonymSource,
    ParseError,
)
from textsmooth.records import AugmentedExample, LabeledExample

SENTENCE = LabeledExample("the movie was good and the story was great .", "positive")


class TestEdaConfig:
    def test_defaults(self):
        cfg = EdaConfig()
        assert cfg.alpha == 0.1 and cfg.num_aug_per_example == 1
        assert len(cfg.ops_enabled) == 4

    @pytest.mark.parametrize("kwargs", [
        {"alpha": 0.0},
        {"alpha": 1.5},
        {"ops_enabled": set()},
        {"ops_enabled": {"reverse_text"}},
        {"num_aug_per_example": 0},
    ])
    def test_rejects_bad_values(self, kwargs):
        with pytest.raises(ConfigError):
            EdaConfig(**kwargs)


class TestEdaAugment:
    def test_returns_requested_count(self):
        out = eda_augment(SENTENCE, EdaConfig(num_aug_per_example=4), seed=0)
        assert len(out) == 4
        assert all(a.label == "positive" for a in out)

    def test_single_token_swap_is_identity(self):
        ex = LabeledExample("good", "positive")
        cfg = EdaConfig(ops_enabled={"random_swap"})
        out = eda_augment(ex, cfg, seed=1)
        assert out[0].augmented_text == "good"

    def test_swap_preserves_token_multiset(self):
        ex = LabeledExample("a b c d e f g h i j", "x")
        cfg = EdaConfig(alpha=0.1, ops_enabled={"random_swap"})
        out = eda_augment(ex, cfg, seed=5)[0]
        assert Counter(out.augmented_text.split()) == Counter(ex.text.split())
        # alpha=0.1 on 10 tokens means one exchanged pair
        changed = sum(a != b for a, b in zip(ex.text.split(), out.augmented_text.split()))
        assert changed == 2

    def test_deletion_with_alpha_one_keeps_exactly_one(self):
        ex = LabeledExample("a b c d e", "x")
        cfg = EdaConfig(alpha=1.0, ops_enabled={"random_deletion"})
        out = eda_augment(ex, cfg, seed=2)[0]
        assert len(out.augmented_text.split()) == 1

    def test_deletion_length_bounds(self):
        ex = LabeledExample("a b c d e f g h", "x")
        cfg = EdaConfig(alpha=0.3, ops_enabled={"random_deletion"})
        for seed in range(10):
            out = eda_augment(ex, cfg, seed=seed)[0]
            assert 1 <= len(out.augmented_text.split()) <= 8

    def test_insertion_grows_by_n(self):
        ex = LabeledExample("the movie was good and the story was great govern", "x")
        cfg = EdaConfig(alpha=0.2, ops_enabled={"random_insertion"})
        out = eda_augment(ex, cfg, seed=3)[0]
        # n = max(1, round(0.2 * 10)) = 2 insertions
        assert len(out.augmented_text.split()) == 12

    def test_synonym_replacement_uses_table(self):
        ex = LabeledExample("the movie was good", "x")
        cfg = EdaConfig(alpha=0.1, ops_enabled={"synonym_replacement"})
        table = {"movie": ("film",), "good": ("great",)}
        out = eda_augment(ex, cfg, seed=4, synonyms=table)[0]
        assert out.augmented_text != ex.text
        assert set(out.augmented_text.split()) <= {"the", "movie", "film", "was", "good", "great"}

    def test_missing_synonym_source(self):
        cfg = EdaConfig(ops_enabled={"synonym_replacement"})
        with pytest.raises(NoSynonymSource):
            eda_augment(SENTENCE, cfg, seed=0, synonyms={})

    def test_swap_only_needs_no_table(self):
        cfg = EdaConfig(ops_enabled={"random_swap"})
        out = eda_augment(SENTENCE, cfg, seed=0, synonyms={})
        assert len(out) == 1

    def test_deterministic_per_seed(self):
        cfg = EdaConfig(num_aug_per_example=3)
        a = [x.augmented_text for x in eda_augment(SENTENCE, cfg, seed=7)]
        b = [x.augmented_text for x in eda_augment(SENTENCE, cfg, seed=7)]
        assert a == b

    def test_seeds_produce_different_outputs(self):
        cfg = EdaConfig(alpha=0.3)
        differing = 0
        for seed in range(5):
            one = eda_augment(SENTENCE, cfg, seed=2 * seed)[0].augmented_text
            two = eda_augment(SENTENCE, cfg, seed=2 * seed + 1)[0].augmented_text
            differing += one != two
        assert differing >= 3

    def test_empty_after_tokenization(self):
        with pytest.raises(EmptyText):
            LabeledExample("   ", "x")

    def test_pair_text_augments_both_parts(self):
        ex = LabeledExample(("the movie was good", "the plot was bad"), "x")
        cfg = EdaConfig(alpha=0.5, ops_enabled={"random_swap"})
        out = eda_augment(ex, cfg, seed=11)[0]
        assert isinstance(out.augmented_text, tuple)
        assert Counter(out.augmented_text[0].split()) == Counter(ex.text[0].split())

    def test_provenance_names_the_op(self):
        cfg = EdaConfig(ops_enabled={"random_deletion"})
        assert eda_augment(SENTENCE, cfg, seed=0)[0].augmenter_name == "eda:random_deletion"


class TestSynonymTable:
    def test_load_bundled_format(self, tmp_path):
        path = tmp_path / "syn.tsv"
        path.write_text("good\tgreat,fine\nbad\tawful\n", encoding="utf-8")
        table = load_synonym_table(path)
        assert table["good"] == ("great", "fine")
        assert table["bad"] == ("awful",)

    def test_malformed_line_names_lineno(self, tmp_path):
        path = tmp_path / "syn.tsv"
        path.write_text("good\tgreat\nbroken-line\n", encoding="utf-8")
        with pytest.raises(ParseError) as excinfo:
            load_synonym_table(path)
        assert excinfo.value.line == 2

    def test_missing(self, tmp_path):
        with pytest.raises(MissingFile):
            load_synonym_table(tmp_path / "nope.tsv")


def delta_backend(target_token: str) -> MicroBackend:
    """A micro backend whose every position predicts one token with ~all mass.

    Zero encoder weights except the final layernorm shift, which sets every
    hidden row to a constant vector aligned with the target token's
    (huge) embedding row.
    """
    config = MicroConfig()
    weights = zero_micro_weights(config)
    target = MICRO_VOCAB.index(target_token)
    direction = np.zeros(config.embed_size, dtype=np.float32)
    direction[0] = 1.0
    weights["layers.1.ffn_beta"] = direction * 10.0
    table = np.zeros((config.vocab_size, config.embed_size), dtype=np.float32)
    table[target, 0] = 10.0
    weights["word_embeddings"] = table
    return MicroBackend(weights=weights, config=config)


class TestMlmReplace:
    def test_minimum_one_position(self, micro_backend):
        ex = LabeledExample("the movie was good and the story was great .", "x")
        enc = micro_backend.encode(ex.text)
        out = mlm_replace_augment(ex, mask_ratio=1e-9, seed=0, backend=micro_backend)
        before = enc.token_ids
        after = micro_backend.encode(out.augmented_text).token_ids
        # ceil guard: exactly one non-special position replaced at most
        assert np.count_nonzero(before != after) <= 1

    def test_delta_fixture_forces_target(self):
        backend = delta_backend("pear")
        ex = LabeledExample("the movie was good .", "x")
        out = mlm_replace_augment(ex, mask_ratio=0.4, seed=1, backend=backend)
        words_before = ex.text.split()
        words_after = out.augmented_text.split()
        assert len(words_before) == len(words_after)
        replaced = [w for w in words_after if w not in words_before]
        assert replaced and all(w == "pear" for w in replaced)

    def test_argmax_mode_deterministic(self, micro_backend):
        ex = LabeledExample("the movie was good .", "x")
        one = mlm_replace_augment(ex, 0.3, seed=5, backend=micro_backend, argmax=True)
        two = mlm_replace_augment(ex, 0.3, seed=5, backend=micro_backend, argmax=True)
        assert one.augmented_text == two.augmented_text

    def test_sampled_mode_deterministic_per_seed(self, micro_backend):
        ex = LabeledExample("the movie was good and the story was great .", "x")
        one = mlm_replace_augment(ex, 0.3, seed=8, backend=micro_backend)
        two = mlm_replace_augment(ex, 0.3, seed=8, backend=micro_backend)
        assert one.augmented_text == two.augmented_text

    def test_sampled_mode_varies_across_seeds(self, micro_backend):
        ex = LabeledExample("the movie was good and the story was great .", "x")
        differing = 0
        for seed in range(5):
            one = mlm_replace_augment(ex, 0.4, seed=2 * seed, backend=micro_backend)
            two = mlm_replace_augment(ex, 0.4, seed=2 * seed + 1, backend=micro_backend)
            differing += one.augmented_text != two.augmented_text
        assert differing >= 3

    def test_hamming_bounded_by_masked_count(self, micro_backend):
        ex = LabeledExample("the movie was good and the story was great .", "x")
        enc = micro_backend.encode(ex.text)
        n_content = int((~enc.special_mask).sum())
        for seed in range(5):
            out = mlm_replace_augment(ex, 0.3, seed=seed, backend=micro_backend)
            after = micro_backend.encode(out.augmented_text).token_ids
            budget = int(np.ceil(0.3 * n_content))
            assert np.count_nonzero(enc.token_ids != after) <= budget

    def test_all_positions_special_is_error(self, micro_backend):
        ex = LabeledExample("good", "x")
        enc = micro_backend.encode(ex.text)

        class AllSpecialBackend:
            descriptor = micro_backend.descriptor
            mask_token_id = micro_backend.mask_token_id

            def encode(self, text):
                return type(enc)(
                    token_ids=enc.token_ids, position_ids=enc.position_ids,
                    segment_ids=enc.segment_ids,
                    special_mask=np.ones_like(enc.special_mask),
                )

        with pytest.raises(EmptyText):
            mlm_replace_augment(ex, 0.5, seed=0, backend=AllSpecialBackend())

    def test_label_preserved(self, micro_backend):
        out = mlm_replace_augment(SENTENCE, 0.2, seed=0, backend=micro_backend)
        assert out.label == SENTENCE.label

    @pytest.mark.parametrize("ratio", [0.0, 1.0, -0.5])
    def test_ratio_bounds(self, micro_backend, ratio):
        with pytest.raises(ConfigError):
            mlm_replace_augment(SENTENCE, ratio, seed=0, backend=micro_backend)


class TestImportExternal:
    def test_two_line_file(self, tmp_path):
        path = tmp_path / "aug.tsv"
        path.write_text("positive\tgreat film .\nnegative\tawful plot .\n", encoding="utf-8")
        out = import_external(path, "backtranslation")
        assert len(out) == 2
        assert out[0].augmenter_name == "backtranslation"
        assert out[0].label == "positive"
        assert out[1].augmented_text == "awful plot ."

    def test_pair_rows(self, tmp_path):
        path = tmp_path / "aug.tsv"
        path.write_text("entailment\ta premise\ta hypothesis\n", encoding="utf-8")
        out = import_external(path, "x")
        assert out[0].augmented_text == ("a premise", "a hypothesis")

    def test_wrong_field_count_names_line(self, tmp_path):
        path = tmp_path / "aug.tsv"
        path.write_text("positive\tok\nonly-one-field\n", encoding="utf-8")
        with pytest.raises(ParseError) as excinfo:
            import_external(path, "x")
        assert excinfo.value.line == 2

    def test_empty_file_is_empty_list(self, tmp_path):
        path = tmp_path / "aug.tsv"
        path.write_text("", encoding="utf-8")
        assert import_external(path, "x") == []

    def test_missing_file(self, tmp_path):
        with pytest.raises(MissingFile):
            import_external(tmp_path / "nope.tsv", "x")

    def test_round_trip_through_writer(self, tmp_path):
        examples = [
            AugmentedExample(LabeledExample("good film .", "positive"),
                             "great film .", "eda:synonym_replacement", seed=1),
        ]
        path = tmp_path / "out.tsv"
        assert write_augmented_tsv(examples, path) == 1
        back = import_external(path, "eda")
        assert back[0].augmented_text == "great film ."

    def test_writer_rejects_tabs_in_fields(self, tmp_path):
        examples = [AugmentedExample(LabeledExample("ok", "x"), "bad\tfield", "a")]
        with pytest.raises(ParseError):
            write_augmented_tsv(examples, tmp_path / "out.tsv")


class TestCompose:
    def make_augmented(self, k):
        out = []
        for i in range(k):
            base = LabeledExample(f"the movie was good {i} .", "positive")
            out.append(AugmentedExample(base, f"the film was good {i} .", "eda", seed=i))
        return out

    def test_k_plus_k_stream(self):
        stream = compose_with_smoothing(self.make_augmented(4), lam=0.1)
        assert stream.size == 8
        assert stream.n_original == 4 and stream.n_augmented == 4
        assert stream.multiplier == 2.0
        assert all(item.route == "smooth" for item in stream.items)

    def test_lambda_one_is_discrete_training(self):
        stream = compose_with_smoothing(self.make_augmented(2), lam=1.0)
        assert stream.lam == 1.0  # endpoint: smoothing degenerates to one-hot

    def test_empty_is_error(self):
        with pytest.raises(EmptyDataset):
            compose_with_smoothing([], lam=0.1)

    def test_lambda_validated(self):
        with pytest.raises(LambdaOutOfRange):
            compose_with_smoothing(self.make_augmented(1), lam=2.0)

    def test_explicit_originals(self):
        originals = [LabeledExample("the real source .", "positive")]
        stream = compose_with_smoothing(self.make_augmented(2), 0.1, originals=originals)
        assert stream.n_original == 1 and stream.size == 3
        assert stream.items[0].example.text == "the real source ."

    def test_smoothing_only_stream(self):
        originals = [LabeledExample("good .", "positive"), LabeledExample("bad .", "negative")]
        stream = smoothing_stream(originals, lam=0.1)
        assert stream.size == 2 and stream.multiplier == 1.0
