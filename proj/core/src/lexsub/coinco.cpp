#include "ambiprobe/lexsub/coinco.hpp"

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include <sstream>

#include "ambiprobe/error.hpp"
#include "ambiprobe/lm/tokenizer.hpp"
#include "ambiprobe/util/binary_io.hpp"

namespace ambiprobe::lexsub {

namespace pt = boost::property_tree;

namespace {

void append_tokens(std::vector<std::string>& out, const std::string& text) {
  for (auto& t : lm::tokenize(text)) out.push_back(std::move(t));
}

void collect_sentences(const pt::ptree& node, std::vector<SubstitutionItem>& items) {
  for (const auto& [name, child] : node) {
    if (name != "sent") {
      if (name != "<xmlattr>") collect_sentences(child, items);
      continue;
    }
    const auto sent_id = child.get<std::string>("<xmlattr>.MASCsentID", std::to_string(items.size()));
    std::vector<std::string> context;
    append_tokens(context, child.get<std::string>("precontext", ""));
    struct Pending {
      std::size_t index;
      const pt::ptree* token;
    };
    std::vector<Pending> pending;
    if (auto tokens = child.get_child_optional("tokens")) {
      for (const auto& [tname, tok] : *tokens) {
        if (tname != "token") continue;
        auto form = tok.get<std::string>("<xmlattr>.wordform");
        if (tok.get_child_optional("substitutions")) pending.push_back({context.size(), &tok});
        context.push_back(std::move(form));
      }
    }
    append_tokens(context, child.get<std::string>("postcontext", ""));
    for (const auto& p : pending) {
      const auto& tok = *p.token;
      SubstitutionItem item;
      item.id = sent_id + "." + tok.get<std::string>("<xmlattr>.id", std::to_string(p.index));
      item.context = context;
      item.target_index = p.index;
      item.target_form = context[p.index];
      item.target_lemma = tok.get<std::string>("<xmlattr>.lemma");
      item.pos = tok.get<std::string>("<xmlattr>.posMASC", tok.get<std::string>("<xmlattr>.posTT", ""));
      item.compound = tok.get<std::string>("<xmlattr>.problematic", "no") != "no" ||
                      item.target_form.find('-') != std::string::npos;
      for (const auto& [sname, sub] : tok.get_child("substitutions")) {
        if (sname != "subst") continue;
        auto lemma = sub.get<std::string>("<xmlattr>.lemma");
        auto count = sub.get<std::uint32_t>("<xmlattr>.freq", 1);
        bool merged = false;
        for (auto& s : item.substitutes) {
          if (s.lemma == lemma) {
            s.count += count;
            merged = true;
          }
        }
        if (!merged) item.substitutes.push_back({lemma, count, is_multi_word(lemma)});
      }
      if (!item.substitutes.empty()) items.push_back(std::move(item));
    }
  }
}

}  // namespace

std::vector<SubstitutionItem> parse_coinco(std::string_view xml) {
  pt::ptree tree;
  try {
    std::istringstream in{std::string(xml)};
    pt::read_xml(in, tree);
    std::vector<SubstitutionItem> items;
    collect_sentences(tree, items);
    return items;
  } catch (const pt::ptree_error& e) {
    throw InputError(std::string("coinco: ") + e.what());
  }
}

std::vector<SubstitutionItem> load_coinco(const std::filesystem::path& path) {
  return parse_coinco(util::read_file(path));
}

}  // namespace ambiprobe::lexsub
