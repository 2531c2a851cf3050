#pragma once

#include <string>

#include "quadflow/horn_schunck.hpp"
#include "quadflow/image.hpp"
#include "quadflow/image_io.hpp"

namespace quadflow {

// Source of the four pairwise flows the pipeline consumes: either the
// built-in estimator or precomputed .flo files addressed by a path template
// with {src} and {dst} placeholders (indices in {-1,0,1,2}).
struct FlowProvider {
  enum class Mode { Estimator, Files };
  Mode mode = Mode::Estimator;
  HornSchunckParams params;
  std::string file_template;  // e.g. "out/flow_{src}to{dst}.flo"

  static FlowProvider estimator(const HornSchunckParams& p = {}) {
    FlowProvider fp;
    fp.mode = Mode::Estimator;
    fp.params = p;
    return fp;
  }
  static FlowProvider files(std::string path_template) {
    FlowProvider fp;
    fp.mode = Mode::Files;
    fp.file_template = std::move(path_template);
    return fp;
  }
};

struct QuartetFlows {
  FlowField f01;   // frame 0 -> 1
  FlowField f0m1;  // frame 0 -> -1
  FlowField f10;   // frame 1 -> 0
  FlowField f12;   // frame 1 -> 2
};

namespace detail {

inline std::string expand_flow_template(const std::string& tmpl, int src, int dst) {
  std::string out = tmpl;
  const auto replace = [&out](const std::string& key, int value) {
    const auto pos = out.find(key);
    if (pos == std::string::npos)
      throw std::invalid_argument("flow file template missing placeholder " + key);
    out.replace(pos, key.size(), std::to_string(value));
  };
  replace("{src}", src);
  replace("{dst}", dst);
  return out;
}

inline FlowField quartet_pair(const FlowProvider& provider, const Image& src_img,
                              const Image& dst_img, int src, int dst) {
  try {
    if (provider.mode == FlowProvider::Mode::Estimator)
      return estimate_flow(src_img, dst_img, provider.params);
    FlowField f = read_flo(expand_flow_template(provider.file_template, src, dst));
    if (f.width != src_img.width || f.height != src_img.height)
      throw std::runtime_error("flow file dimensions " + std::to_string(f.width) + "x" +
                               std::to_string(f.height) + " do not match frames");
    return f;
  } catch (const std::exception& e) {
    throw std::runtime_error("flow " + std::to_string(src) + "->" + std::to_string(dst) + ": " +
                             e.what());
  }
}

}  // namespace detail

inline QuartetFlows flows_for_quartet(const FlowProvider& provider, const Image& frame_m1,
                                      const Image& frame_0, const Image& frame_1,
                                      const Image& frame_2) {
  if (!frame_m1.same_size(frame_0) || !frame_0.same_size(frame_1) || !frame_1.same_size(frame_2))
    throw std::invalid_argument("flows_for_quartet: frames differ in size");
  QuartetFlows q;
  q.f01 = detail::quartet_pair(provider, frame_0, frame_1, 0, 1);
  q.f0m1 = detail::quartet_pair(provider, frame_0, frame_m1, 0, -1);
  q.f10 = detail::quartet_pair(provider, frame_1, frame_0, 1, 0);
  q.f12 = detail::quartet_pair(provider, frame_1, frame_2, 1, 2);
  return q;
}

}  // namespace quadflow
