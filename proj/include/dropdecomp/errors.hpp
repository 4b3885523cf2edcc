#pragma once
#include <stdexcept>
#include <string>

namespace dd {

// Base of every library error. `math()` separates expected mathematical
// failures (exit 2) from engineering ones (exit 1).
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
    virtual const char* kind() const noexcept = 0;
    virtual bool math() const noexcept { return true; }
};

#define DD_ERROR(Name, tag, is_math)                                          \
    class Name : public Error {                                               \
    public:                                                                   \
        explicit Name(const std::string& what) : Error(what) {}              \
        const char* kind() const noexcept override { return tag; }            \
        bool math() const noexcept override { return is_math; }               \
    };

DD_ERROR(ClassMismatch, "class-mismatch", true)
DD_ERROR(Malformed, "malformed", true)
DD_ERROR(BlockStructure, "block-structure", true)
DD_ERROR(DomainError, "domain", true)
DD_ERROR(BranchAmbiguity, "branch-ambiguity", true)
DD_ERROR(GapViolation, "gap-violation", true)
DD_ERROR(PartitionHypothesis, "partition-hypothesis", true)
DD_ERROR(EndpointIncompatibility, "endpoint-incompatibility", true)
DD_ERROR(Undersampling, "undersampling", true)
DD_ERROR(Obstruction, "obstruction", true)
DD_ERROR(Hypothesis, "hypothesis", true)
DD_ERROR(Continuity, "continuity", true)
DD_ERROR(Resource, "resource", true)
DD_ERROR(MeshIncompatibility, "mesh-incompatibility", true)
DD_ERROR(ClusterCollision, "cluster-collision", true)
DD_ERROR(RankError, "rank", true)
DD_ERROR(GeneratorError, "generator", true)
DD_ERROR(StructureError, "structure", true)
DD_ERROR(Infeasible, "infeasible", true)
DD_ERROR(PunctureSearch, "puncture-search", true)
DD_ERROR(SchemaError, "schema", false)
DD_ERROR(IoError, "io", false)

#undef DD_ERROR

}  // namespace dd
