#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "valet/avm.hpp"

namespace {

using namespace valet;

std::vector<GrayImage> noise_images(const CameraRig& rig) {
  std::mt19937_64 rng(3);
  std::vector<GrayImage> out;
  for (const auto& cam : rig.cameras) {
    GrayImage img(cam.intrinsics.width, cam.intrinsics.height);
    for (auto& p : img.pixels()) p = static_cast<std::uint8_t>(rng() >> 56);
    out.push_back(std::move(img));
  }
  return out;
}

void BM_BuildLut(benchmark::State& state) {
  const CameraRig rig = default_rig(VehicleParams{});
  const AvmSpec spec;
  for (auto _ : state) benchmark::DoNotOptimize(build_lut(rig, spec));
}
BENCHMARK(BM_BuildLut)->Unit(benchmark::kMillisecond);

void BM_ApplyLut(benchmark::State& state) {
  const CameraRig rig = default_rig(VehicleParams{});
  const AvmSpec spec;
  const Lut lut = build_lut(rig, spec);
  const auto imgs = noise_images(rig);
  for (auto _ : state) benchmark::DoNotOptimize(apply_lut(lut, imgs));
  state.SetItemsProcessed(state.iterations() * spec.width() * spec.height());
}
BENCHMARK(BM_ApplyLut)->Unit(benchmark::kMillisecond);

void BM_RemapDirect(benchmark::State& state) {
  const CameraRig rig = default_rig(VehicleParams{});
  const AvmSpec spec;
  const auto imgs = noise_images(rig);
  for (auto _ : state) benchmark::DoNotOptimize(remap_direct(rig, spec, imgs));
  state.SetItemsProcessed(state.iterations() * spec.width() * spec.height());
}
BENCHMARK(BM_RemapDirect)->Unit(benchmark::kMillisecond);

}  // namespace
