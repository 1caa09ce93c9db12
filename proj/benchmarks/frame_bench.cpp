#include "parley/message.hpp"
#include "parley/net/frame.hpp"

#include <benchmark/benchmark.h>

namespace {

parley::Message sample(std::size_t text_size)
{
    parley::Message m;
    m.id = "babi:Task1k:1";
    m.text = std::string(text_size, 'x');
    m.labels = std::vector<std::string>{"kitchen"};
    m.label_candidates = std::vector<std::string>{"kitchen", "garden", "office", "hallway", "bathroom"};
    m.episode_done = true;
    return m;
}

void BM_EncodeFrame(benchmark::State& state)
{
    const auto m = sample(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(parley::net::encode_frame(m));
    state.SetBytesProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_EncodeFrame)->Range(16, 1 << 16);

void BM_DecodeFrame(benchmark::State& state)
{
    const auto frame = parley::net::encode_frame(sample(static_cast<std::size_t>(state.range(0))));
    for (auto _ : state) benchmark::DoNotOptimize(parley::net::decode_frame(frame));
    state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(frame.size()));
}
BENCHMARK(BM_DecodeFrame)->Range(16, 1 << 16);

void BM_FrameReaderStream(benchmark::State& state)
{
    std::string stream;
    for (int i = 0; i < 64; ++i) stream += parley::net::encode_frame(sample(200));
    for (auto _ : state) {
        parley::net::FrameReader reader;
        for (std::size_t pos = 0; pos < stream.size(); pos += 1500) {
            reader.feed(std::string_view(stream).substr(pos, 1500));
            while (auto payload = reader.next()) benchmark::DoNotOptimize(payload);
        }
    }
    state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(stream.size()));
}
BENCHMARK(BM_FrameReaderStream);

}  // namespace
