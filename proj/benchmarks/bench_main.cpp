#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include "tdost/embedding.hpp"
#include "tdost/renderer.hpp"
#include "tdost/synthetic_home.hpp"
#include "tdost/verbalizer.hpp"
#include "tdost/windowing.hpp"

namespace {

using namespace tdost;

const synthetic::HomeBundle& home() {
    static const synthetic::HomeBundle bundle = [] {
        synthetic::GenerationRecipe recipe;
        recipe.seed = 3;
        recipe.days = 7;
        return synthetic::generate(synthetic::load_template_file(std::string(TDOST_DATA_DIR) + "/templates/home_a.json"),
                                   recipe);
    }();
    return bundle;
}

void BM_NumberToWords(benchmark::State& state) {
    std::uint64_t n = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(verbalizer::number_to_words(n));
        n = (n * 6364136223846793005ULL + 1442695040888963407ULL) % 1000000000ULL;
    }
}
BENCHMARK(BM_NumberToWords);

void BM_RenderWindow(benchmark::State& state) {
    const auto& h = home();
    const auto variant = static_cast<TdostVariant>(state.range(0));
    const std::span<const SensorEvent> events(h.log.events.data(), 100);
    for (auto _ : state) benchmark::DoNotOptimize(render_window(events, h.layout, variant, nullptr));
    state.SetItemsProcessed(state.iterations() * 100);
}
BENCHMARK(BM_RenderWindow)->Arg(static_cast<int>(TdostVariant::Basic))->Arg(static_cast<int>(TdostVariant::Temporal));

void BM_MakeFolds(benchmark::State& state) {
    const auto& h = home();
    const auto windows = build_windows(h.log, segment(h.log, h.map), h.layout, TdostVariant::Basic, nullptr);
    for (auto _ : state) benchmark::DoNotOptimize(make_folds(windows, 7));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(windows.size()));
}
BENCHMARK(BM_MakeFolds);

void BM_HashEmbed(benchmark::State& state) {
    const HashEmbedder embedder(static_cast<std::size_t>(state.range(0)), 0);
    std::vector<float> out(embedder.dimension());
    const std::string sentence = "Motion sensor in the kitchen near the stove fired with value ON.";
    for (auto _ : state) {
        embedder.embed(sentence, out);
        benchmark::DoNotOptimize(out.data());
    }
}
BENCHMARK(BM_HashEmbed)->Arg(384)->Arg(768);

}  // namespace

BENCHMARK_MAIN();
