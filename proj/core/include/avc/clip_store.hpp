#pragma once

#include <map>
#include <mutex>
#include <string>

#include "avc/audio.hpp"
#include "avc/augment.hpp"
#include "avc/quality.hpp"

namespace avc {

// Loads WAV files from disk; saves stretched copies as float32 WAVs either
// beside the source (default) or into a fixed directory.
class DirClipStore {
 public:
  DirClipStore() = default;
  explicit DirClipStore(std::string save_dir) : save_dir_(std::move(save_dir)) {}

  ClipLoader loader() const;
  ClipSaver saver();

 private:
  std::string save_dir_;
};

// In-memory store for tests and small pipelines.
class MemoryClipStore {
 public:
  void put(const std::string& path, MonoClip clip);
  ClipLoader loader() const;
  ClipSaver saver();

 private:
  std::map<std::string, MonoClip> clips_;
  mutable std::mutex mutex_;
};

}  // namespace avc
