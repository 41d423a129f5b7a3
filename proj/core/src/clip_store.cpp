#include "avc/clip_store.hpp"

#include <filesystem>

#include "avc/errors.hpp"

namespace fs = std::filesystem;

namespace avc {

ClipLoader DirClipStore::loader() const {
  return [](const SampleRecord& rec) {
    return downmix(decode_wav_file(rec.path));
  };
}

ClipSaver DirClipStore::saver() {
  const std::string dir = save_dir_;
  return [dir](const SampleRecord& base, const std::string& suffix,
               const MonoClip& clip) {
    fs::path src(base.path);
    fs::path out_dir = dir.empty() ? src.parent_path() : fs::path(dir);
    fs::path out = out_dir / (src.stem().string() + suffix + ".wav");
    write_wav_file(out.string(), clip, WavEncoding::float32);
    return out.string();
  };
}

void MemoryClipStore::put(const std::string& path, MonoClip clip) {
  std::lock_guard<std::mutex> lock(mutex_);
  clips_[path] = std::move(clip);
}

ClipLoader MemoryClipStore::loader() const {
  return [this](const SampleRecord& rec) {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = clips_.find(rec.path);
    if (it == clips_.end()) {
      throw IoError("memory clip store: no clip for " + rec.path);
    }
    return it->second;
  };
}

ClipSaver MemoryClipStore::saver() {
  return [this](const SampleRecord& base, const std::string& suffix,
                const MonoClip& clip) {
    const std::string path = base.path + suffix;
    put(path, clip);
    return path;
  };
}

}  // namespace avc
