#include "reception/demo.hpp"

#include <gtest/gtest.h>

#include <map>

using namespace reception;

namespace {

std::map<PlantKind, std::size_t> kind_counts(const DemoCorpus& c) {
    std::map<PlantKind, std::size_t> out;
    for (const auto& p : c.plants) ++out[p.kind];
    return out;
}

const DocumentRecord& doc(const DemoCorpus& c, const std::string& id) {
    for (const auto& d : c.documents) if (d.doc_id == id) return d;
    throw std::logic_error("missing " + id);
}

}  // namespace

TEST(Demo, DeterministicForSeed) {
    auto a = make_demo_corpus();
    auto b = make_demo_corpus();
    ASSERT_EQ(a.documents.size(), b.documents.size());
    for (std::size_t i = 0; i < a.documents.size(); ++i) {
        EXPECT_EQ(a.documents[i].doc_id, b.documents[i].doc_id);
        EXPECT_EQ(a.documents[i].text, b.documents[i].text);
    }
    DemoOptions other;
    other.seed = 43;
    EXPECT_NE(make_demo_corpus(other).documents[0].text, a.documents[0].text);
}

TEST(Demo, PlantedCounts) {
    const auto c = make_demo_corpus();
    const DemoOptions o;
    EXPECT_EQ(c.documents.size(), c.plants.size());
    EXPECT_EQ(c.documents.size(), 2 + o.quotes * (o.verbatim_per_quote + o.paraphrases_per_quote +
                                                  o.topical_per_quote) + o.noise_docs + o.french_docs);
    auto k = kind_counts(c);
    EXPECT_EQ(k[PlantKind::Source], 1u);
    EXPECT_EQ(k[PlantKind::SourceEdition], 1u);
    EXPECT_EQ(k[PlantKind::Verbatim], 24u);
    EXPECT_EQ(k[PlantKind::Paraphrase], 8u);
    EXPECT_EQ(k[PlantKind::MeaningVariant], 8u);
    EXPECT_EQ(k[PlantKind::Topical], 24u);
    EXPECT_EQ(c.quotes.size(), 8u);
}

TEST(Demo, PlantsAreWhereGroundTruthSays) {
    const auto c = make_demo_corpus();
    const auto& source = doc(c, c.source_doc_id);
    AlignmentParams p;
    for (const auto& q : c.quotes) {
        const auto len = utf8_length(q.text);
        EXPECT_GE(len, 180u);
        EXPECT_LE(len, 260u);
        EXPECT_EQ(source.text.substr(q.source_span.begin, q.source_span.length()), q.text);
    }
    for (const auto& plant : c.plants) {
        const auto& d = doc(c, plant.doc_id);
        EXPECT_EQ(d.work_id, plant.work_id);
        if (plant.kind == PlantKind::Verbatim) {
            const auto& q = c.quotes[*plant.quote_index];
            EXPECT_EQ(d.text.substr(plant.target_span.begin, plant.target_span.length()), q.text);
            EXPECT_NE(d.work_id, c.source_work_id);
        }
        if (plant.kind == PlantKind::Paraphrase || plant.kind == PlantKind::MeaningVariant ||
            plant.kind == PlantKind::Topical) {
            EXPECT_TRUE(align_pair(c.quotes[*plant.quote_index].text, d.text, p).empty()) << plant.doc_id;
        }
        if (plant.kind == PlantKind::SourceEdition) {
            EXPECT_EQ(d.work_id, c.source_work_id);
        }
    }
}

TEST(Demo, OcrCorruption) {
    EXPECT_EQ(corrupt_ocr("The Mind", 0.0, 3), "The Mind");
    const std::string text(10000, 'e');
    const auto noisy = corrupt_ocr(text, 0.1, 3);
    ASSERT_EQ(noisy.size(), text.size());
    std::size_t changed = 0;
    for (std::size_t i = 0; i < text.size(); ++i) changed += noisy[i] != text[i];
    EXPECT_NEAR(changed / 10000.0, 0.1, 0.015);
    EXPECT_EQ(corrupt_ocr("12 ,. ;", 1.0, 1), "12 ,. ;");

    DemoOptions o;
    o.ocr_rate = 0.05;
    const auto clean = make_demo_corpus();
    const auto dirty = make_demo_corpus(o);
    for (std::size_t i = 0; i < clean.documents.size(); ++i) {
        ASSERT_EQ(clean.documents[i].doc_id, dirty.documents[i].doc_id);
        ASSERT_EQ(clean.documents[i].text.size(), dirty.documents[i].text.size());
        if (clean.documents[i].doc_id == clean.source_doc_id) {
            EXPECT_EQ(clean.documents[i].text, dirty.documents[i].text);
        } else if (clean.documents[i].text.size() > 200) {
            EXPECT_NE(clean.documents[i].text, dirty.documents[i].text);
        }
    }
}

TEST(Demo, SimulatedLabels) {
    const auto c = make_demo_corpus();
    EXPECT_EQ(simulated_label(c.plants, 2, "vb-2-0"), Label::Paraphrase);
    EXPECT_EQ(simulated_label(c.plants, 2, "pp-2-0"), Label::Paraphrase);
    EXPECT_EQ(simulated_label(c.plants, 2, "pp-2-1"), Label::MeaningMatch);
    EXPECT_EQ(simulated_label(c.plants, 2, "tp-2-1"), Label::TopicalMatch);
    EXPECT_EQ(simulated_label(c.plants, 3, "tp-2-1"), Label::NoMatch);
    EXPECT_EQ(simulated_label(c.plants, 3, "nobody"), Label::NoMatch);
    std::size_t dk = 0;
    for (const auto& p : c.plants) {
        if (p.kind == PlantKind::Noise) dk += simulated_label(c.plants, 0, p.doc_id) == Label::DontKnow;
    }
    EXPECT_GT(dk, 0u);
    EXPECT_LT(dk, 20u);
}

TEST(Demo, JsonRoundTrip) {
    const auto c = make_demo_corpus();
    for (const auto& p : c.plants) {
        auto back = plant_from_json(to_json(p));
        EXPECT_EQ(back.doc_id, p.doc_id);
        EXPECT_EQ(back.kind, p.kind);
        EXPECT_EQ(back.quote_index, p.quote_index);
        EXPECT_EQ(back.target_span, p.target_span);
    }
    auto q = demo_quote_from_json(to_json(c.quotes[3]));
    EXPECT_EQ(q.text, c.quotes[3].text);
    EXPECT_EQ(q.source_span, c.quotes[3].source_span);
    EXPECT_GT(demo_vocabulary().size(), 200u);
}

TEST(Demo, OptionsValidated) {
    DemoOptions o;
    o.quotes = 0;
    EXPECT_THROW(o.validate(), std::invalid_argument);
    o = {};
    o.ocr_rate = 1.5;
    EXPECT_THROW(make_demo_corpus(o), std::invalid_argument);
}
