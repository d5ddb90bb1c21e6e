#include <httplib.h>

#include <algorithm>
#include <iostream>
#include <regex>

#include "foon/cli.hpp"
#include "foon/error.hpp"

namespace foon {

namespace {

HttpResponse error_response(int status, const std::string& message) {
  Json j;
  j["error"] = message;
  return {status, dump_canonical(j)};
}

HttpResponse error_response(int status, const Error& e) {
  return error_response(status, e.module() + ": " + e.what());
}

bool valid_id(const std::string& id) {
  static const std::regex pattern("[A-Za-z0-9_-][A-Za-z0-9_.-]*");
  return std::regex_match(id, pattern);
}

const std::string tree_suffix = ".tree.json";

}  // namespace

ReviewStore::ReviewStore(std::filesystem::path directory) : directory_(std::move(directory)) {
  if (!std::filesystem::is_directory(directory_)) {
    throw PreconditionError("cli", "results directory not found: " + directory_.string());
  }
}

std::filesystem::path ReviewStore::file(const std::string& id, const char* suffix) const {
  return directory_ / (id + suffix);
}

std::optional<ProgressDocument> ReviewStore::load_progress(const std::string& id) const {
  if (std::filesystem::exists(file(id, ".progress.json"))) {
    return deserialize_progress(read_text_file(file(id, ".progress.json")));
  }
  if (std::filesystem::exists(file(id, ".tree.json"))) {
    return cmd_progress(deserialize_tree(read_text_file(file(id, ".tree.json"))));
  }
  return std::nullopt;
}

std::mutex& ReviewStore::lock_for(const std::string& id) {
  std::lock_guard guard(locks_mutex_);
  auto& slot = locks_[id];
  if (!slot) slot = std::make_unique<std::mutex>();
  return *slot;
}

HttpResponse ReviewStore::list_recipes() const {
  std::vector<std::string> ids;
  for (const auto& entry : std::filesystem::directory_iterator(directory_)) {
    const std::string name = entry.path().filename().string();
    if (name.size() > tree_suffix.size() && name.ends_with(tree_suffix)) {
      ids.push_back(name.substr(0, name.size() - tree_suffix.size()));
    }
  }
  std::sort(ids.begin(), ids.end());
  Json j;
  j["recipes"] = Json::array();
  for (const auto& id : ids) {
    j["recipes"].push_back({{"recipe_id", id}, {"annotated", std::filesystem::exists(file(id, ".annotations.json"))}});
  }
  return {200, dump_canonical(j)};
}

HttpResponse ReviewStore::progress(const std::string& id) const {
  if (!valid_id(id)) return error_response(400, "cli: invalid recipe id");
  try {
    auto doc = load_progress(id);
    if (!doc) return error_response(404, "cli: no recipe '" + id + "'");
    return {200, serialize_progress(*doc)};
  } catch (const Error& e) {
    return error_response(500, e);
  }
}

HttpResponse ReviewStore::tree(const std::string& id) const {
  if (!valid_id(id)) return error_response(400, "cli: invalid recipe id");
  const auto path = file(id, ".tree.json");
  if (!std::filesystem::exists(path)) return error_response(404, "cli: no recipe '" + id + "'");
  try {
    return {200, serialize_tree(deserialize_tree(read_text_file(path)))};
  } catch (const Error& e) {
    return error_response(500, e);
  }
}

HttpResponse ReviewStore::put_annotations(const std::string& id, const std::string& body) {
  if (!valid_id(id)) return error_response(400, "cli: invalid recipe id");
  std::optional<ProgressDocument> doc;
  try {
    doc = load_progress(id);
  } catch (const Error& e) {
    return error_response(500, e);
  }
  if (!doc) return error_response(404, "cli: no recipe '" + id + "'");
  AnnotationSet set;
  try {
    set = deserialize_annotations(body);
  } catch (const Error& e) {
    return error_response(400, e);
  }
  if (set.recipe_id != id) return error_response(400, "cli: body recipe_id '" + set.recipe_id + "' does not match '" + id + "'");
  try {
    std::vector<std::string> names;
    for (const auto& line : doc->lines) names.push_back(line.ingredient);
    validate_annotations(set, names);
  } catch (const Error& e) {
    return error_response(422, e);
  }
  const std::string text = serialize_annotations(set);
  {
    std::lock_guard guard(lock_for(id));
    write_text_file_atomic(file(id, ".annotations.json"), text);
  }
  return {200, text};
}

struct ReviewServer::Impl {
  ReviewStore& store;
  httplib::Server server;
};

ReviewServer::ReviewServer(ReviewStore& store) : impl_(new Impl{store, {}}) {
  auto reply = [](httplib::Response& res, const HttpResponse& r) {
    res.status = r.status;
    res.set_content(r.body, "application/json");
  };
  auto& s = impl_->server;
  auto& st = impl_->store;
  s.Get("/recipes", [&st, reply](const httplib::Request&, httplib::Response& res) { reply(res, st.list_recipes()); });
  s.Get(R"(/recipes/([^/]+)/progress)", [&st, reply](const httplib::Request& req, httplib::Response& res) {
    reply(res, st.progress(req.matches[1]));
  });
  s.Get(R"(/recipes/([^/]+)/tree)", [&st, reply](const httplib::Request& req, httplib::Response& res) {
    reply(res, st.tree(req.matches[1]));
  });
  s.Put(R"(/recipes/([^/]+)/annotations)", [&st, reply](const httplib::Request& req, httplib::Response& res) {
    reply(res, st.put_annotations(req.matches[1], req.body));
  });
}

ReviewServer::~ReviewServer() = default;

int ReviewServer::bind(const std::string& host, int port) {
  if (port == 0) {
    const int bound = impl_->server.bind_to_any_port(host);
    if (bound < 0) throw PreconditionError("cli", "cannot bind " + host);
    return bound;
  }
  if (!impl_->server.bind_to_port(host, port)) {
    throw PreconditionError("cli", "cannot bind " + host + ":" + std::to_string(port));
  }
  return port;
}

void ReviewServer::listen() { impl_->server.listen_after_bind(); }

void ReviewServer::stop() { impl_->server.stop(); }

void cmd_serve(const std::filesystem::path& results_dir, const std::string& host, int port) {
  ReviewStore store(results_dir);
  ReviewServer server(store);
  const int bound = server.bind(host, port);
  std::cerr << "serving " << results_dir.string() << " on http://" << host << ":" << bound << "\n";
  server.listen();
}

}  // namespace foon
