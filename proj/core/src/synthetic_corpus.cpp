#include "pipesynth/synthetic_corpus.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "pipesynth/error.hpp"

namespace pipesynth {

namespace {

using MF = MetaFeature;

double frac(std::size_t k, std::size_t n) { return n == 0 ? 0.0 : static_cast<double>(k) / static_cast<double>(n); }

TaskKind sample_task(SplitMix& rng, const SyntheticCorpusOptions& options) {
    return rng.bernoulli(options.classification_share) ? TaskKind::Classification : TaskKind::Regression;
}

}  // namespace

std::uint64_t SplitMix::next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

double SplitMix::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

std::size_t SplitMix::integer(std::size_t lo, std::size_t hi) {
    if (hi <= lo) return lo;
    return lo + static_cast<std::size_t>(next() % (hi - lo + 1));
}

MetaFeatureVector sample_synthetic_meta_features(SplitMix& rng, TaskKind task) {
    MetaFeatureVector mf;
    const bool large = rng.bernoulli(0.5);
    mf[MF::NRows] = std::round(std::pow(10.0, large ? rng.uniform(4.3, 6.0) : rng.uniform(2.0, 3.7)));

    std::size_t numeric = rng.integer(0, 12);
    const std::size_t numcat = rng.bernoulli(0.5) ? rng.integer(1, 5) : 0;
    const std::size_t strcat = rng.bernoulli(0.5) ? rng.integer(1, 8) : 0;
    const std::size_t text = rng.bernoulli(0.25) ? rng.integer(1, 2) : 0;
    const std::size_t date = rng.bernoulli(0.2) ? rng.integer(1, 2) : 0;
    if (numeric + numcat + strcat + text + date == 0) numeric = 1;
    const std::size_t features = numeric + numcat + strcat + text + date;

    mf[MF::NFeatures] = static_cast<double>(features);
    mf[MF::NTargets] = rng.bernoulli(0.9) ? 1.0 : 2.0;
    mf[MF::HasMissing] = rng.bernoulli(0.5) ? 1.0 : 0.0;
    const std::pair<MF, std::size_t> kinds[] = {{MF::CountNumeric, numeric},
                                                {MF::CountNumCat, numcat},
                                                {MF::CountStrCat, strcat},
                                                {MF::CountText, text},
                                                {MF::CountDate, date}};
    for (std::size_t i = 0; i < 5; ++i) {
        mf[kinds[i].first] = static_cast<double>(kinds[i].second);
        mf[static_cast<MF>(index(MF::HasNumeric) + i)] = kinds[i].second > 0 ? 1.0 : 0.0;
    }

    const std::size_t nv = numeric + numcat;
    auto split_pair = [&](MF a, MF b) {
        const std::size_t ka = rng.integer(0, nv);
        const std::size_t kb = rng.integer(0, nv - ka);
        mf[a] = frac(ka, nv);
        mf[b] = frac(kb, nv);
    };
    split_pair(MF::FracSkewNormal, MF::FracSkewTailed);
    split_pair(MF::FracKurtNormal, MF::FracKurtTailed);
    {
        const std::size_t normal = rng.integer(0, nv);
        const std::size_t uniform = rng.integer(0, nv - normal);
        const std::size_t poisson = rng.integer(0, nv - normal - uniform);
        mf[MF::FracFeatNormal] = frac(normal, nv);
        mf[MF::FracFeatUniform] = frac(uniform, nv);
        mf[MF::FracFeatPoisson] = frac(poisson, nv);
    }
    if (task == TaskKind::Regression) {
        const double u = rng.uniform();
        mf[MF::TargetIsNormal] = u < 0.4 ? 1.0 : 0.0;
        mf[MF::TargetIsUniform] = u >= 0.4 && u < 0.6 ? 1.0 : 0.0;
        mf[MF::TargetIsPoisson] = u >= 0.6 && u < 0.7 ? 1.0 : 0.0;
    } else {
        mf[MF::TargetIsPoisson] = rng.bernoulli(0.3) ? 1.0 : 0.0;
    }

    if (nv > 0) {
        mf[MF::NormMean] = rng.uniform(0.2, 0.8);
        mf[MF::NormStd] = rng.uniform(0.05, 0.35);
        mf[MF::MeanCv] = rng.uniform(0.0, 3.0);
    }
    if (nv >= 2) {
        mf[MF::CorrMin] = rng.uniform(-1.0, 0.0);
        mf[MF::CorrMax] = rng.uniform(0.0, 1.0);
        const bool strong = mf[MF::CorrMax] >= 0.8 || mf[MF::CorrMin] <= -0.8;
        const std::size_t pairs = nv * (nv - 1) / 2;
        mf[MF::CorrCount] = strong ? static_cast<double>(rng.integer(1, std::min<std::size_t>(pairs, 3))) : 0.0;
    }
    const std::size_t few = rng.integer(0, nv);
    mf[MF::OutlierFewCount] = static_cast<double>(few);
    mf[MF::OutlierManyCount] = static_cast<double>(rng.integer(0, nv - few));

    mf[MF::SparseCount] = static_cast<double>(rng.integer(0, features / 3));
    const std::size_t dominant = rng.integer(0, features / 3);
    mf[MF::DominantCount] = static_cast<double>(dominant);
    mf[MF::ImbalancedCount] = static_cast<double>(rng.integer(0, (features - dominant) / 3));

    const bool classification = task == TaskKind::Classification;
    mf[MF::TargetImbalanced] = classification && rng.bernoulli(0.3) ? 1.0 : 0.0;
    mf[MF::TargetContinuous] = classification ? 0.0 : 1.0;
    mf[MF::TargetCategorical] = classification ? 1.0 : 0.0;
    return mf;
}

std::vector<std::string> planted_fe_sequence(const MetaFeatureVector& mf, SplitMix& rng) {
    std::vector<std::string> seq;
    auto maybe = [&](bool premise, double p, const char* label) {
        // Always draw so the stream does not depend on which premises hold.
        const bool fire = rng.bernoulli(p);
        if (premise && fire) seq.emplace_back(label);
    };
    const double strcat = mf[MF::CountStrCat];
    maybe(mf[MF::HasMissing] >= 0.5, 0.95, "Imputer");
    maybe(strcat >= 1 && strcat <= 3, 0.95, "OrdinalEncoder");
    maybe(strcat >= 4, 0.95, "OneHotEncoder");
    maybe(mf[MF::HasText] >= 0.5, 0.95, "TextPreprocessor");
    maybe(mf[MF::HasText] >= 0.5, 0.95, "TextVectorizer");
    maybe(mf[MF::HasDate] >= 0.5, 0.95, "DateFeaturization");
    maybe(mf[MF::FracSkewTailed] >= 0.3, 0.9, "LogScaler");
    maybe(mf[MF::CountNumeric] >= 5, 0.9, "LinearScaler");
    maybe(mf[MF::TargetImbalanced] >= 0.5, 0.95, "DataBalancer");
    return seq;
}

std::string planted_model(const MetaFeatureVector& mf, TaskKind task) {
    const bool classification = task == TaskKind::Classification;
    if (mf[MF::NRows] > 1e4) return classification ? "CatBoost" : "LightGBM";
    if (mf[MF::HasText] >= 0.5) return classification ? "LogisticRegression" : "Lasso";
    return "RandomForest";
}

MetaCorpus generate_synthetic_corpus(std::uint64_t seed, std::size_t n, const SyntheticCorpusOptions& options) {
    if (n < 50) throw Error(ErrorCode::InvalidArgument, "synthetic corpus needs at least 50 records");
    const Taxonomy& taxonomy = Taxonomy::builtin();
    SplitMix rng(seed);
    MetaCorpus corpus;
    corpus.records.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        AbstractPipeline r;
        char id[32];
        std::snprintf(id, sizeof id, "synthetic-%05zu", i);
        r.dataset_id = id;
        r.task = sample_task(rng, options);
        r.meta_features = sample_synthetic_meta_features(rng, r.task);
        r.fe_sequence = planted_fe_sequence(r.meta_features, rng);
        r.model = planted_model(r.meta_features, r.task);
        const bool noisy = rng.bernoulli(options.model_noise);
        std::vector<std::string> applicable;
        for (const auto& m : taxonomy.models())
            if (m.applicable(r.task)) applicable.push_back(m.name);
        const std::size_t pick = rng.integer(0, applicable.size() - 1);
        if (noisy) r.model = applicable[pick];
        corpus.records.push_back(std::move(r));
    }
    return corpus;
}

std::vector<SyntheticProbe> sample_held_out(std::uint64_t seed, std::size_t n, const SyntheticCorpusOptions& options) {
    // Offset the stream so probes never coincide with corpus draws for the same seed.
    SplitMix rng(seed ^ 0x5a5a5a5a5a5a5a5aull);
    std::vector<SyntheticProbe> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        SyntheticProbe p;
        p.task = sample_task(rng, options);
        p.meta_features = sample_synthetic_meta_features(rng, p.task);
        p.planted_model = planted_model(p.meta_features, p.task);
        out.push_back(std::move(p));
    }
    return out;
}

}  // namespace pipesynth
