#include "driveintent/types.hpp"

namespace driveintent {

std::string to_string(Intention intention) {
  switch (intention) {
    case Intention::ChangeLeft:
      return "change_left";
    case Intention::ChangeRight:
      return "change_right";
    case Intention::Keep:
      return "keep";
  }
  throw Error("invalid intention code");
}

Intention intention_from_string(const std::string& name) {
  if (name == "change_left") return Intention::ChangeLeft;
  if (name == "change_right") return Intention::ChangeRight;
  if (name == "keep") return Intention::Keep;
  throw ParseError("unknown intention label '" + name + "'");
}

}  // namespace driveintent
