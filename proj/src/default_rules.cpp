#include "bases/profiles.hpp"

namespace bases {
namespace {

// Mirrors data/catalogs/rules.json.
constexpr const char* kDefaultRules = R"json({
  "education_levels": [
    "no formal education",
    "primary school",
    "secondary school",
    "vocational",
    "bachelor",
    "master",
    "doctorate"
  ],
  "rules": [
    {
      "id": "age-education/primary-school",
      "kind": "age-education",
      "education": {
        "categories": [
          "primary school"
        ]
      },
      "min_age": 6
    },
    {
      "id": "age-education/secondary-school",
      "kind": "age-education",
      "education": {
        "categories": [
          "secondary school"
        ]
      },
      "min_age": 12
    },
    {
      "id": "age-education/vocational",
      "kind": "age-education",
      "education": {
        "categories": [
          "vocational"
        ]
      },
      "min_age": 16
    },
    {
      "id": "age-education/bachelor",
      "kind": "age-education",
      "education": {
        "categories": [
          "bachelor"
        ]
      },
      "min_age": 18
    },
    {
      "id": "age-education/master",
      "kind": "age-education",
      "education": {
        "categories": [
          "master"
        ]
      },
      "min_age": 22
    },
    {
      "id": "age-education/doctorate",
      "kind": "age-education",
      "education": {
        "categories": [
          "doctorate"
        ]
      },
      "min_age": 24
    },
    {
      "id": "age-career/working-min-age",
      "kind": "age-career",
      "career": {
        "exclude_categories": [
          "student",
          "non-working"
        ]
      },
      "min_age": 16
    },
    {
      "id": "age-career/student-max-age",
      "kind": "age-career",
      "career": {
        "categories": [
          "student"
        ]
      },
      "max_age": 30
    },
    {
      "id": "age-career/primary-pupil",
      "kind": "age-career",
      "career": {
        "values": [
          "primary school pupil",
          "小学生"
        ]
      },
      "min_age": 6,
      "max_age": 13
    },
    {
      "id": "age-career/middle-school-student",
      "kind": "age-career",
      "career": {
        "values": [
          "middle school student",
          "初中生"
        ]
      },
      "min_age": 11,
      "max_age": 16
    },
    {
      "id": "age-career/high-school-student",
      "kind": "age-career",
      "career": {
        "values": [
          "high school student",
          "高中生"
        ]
      },
      "min_age": 14,
      "max_age": 19
    },
    {
      "id": "age-career/vocational-student",
      "kind": "age-career",
      "career": {
        "values": [
          "vocational school student",
          "职校学生"
        ]
      },
      "min_age": 15
    },
    {
      "id": "age-career/undergraduate",
      "kind": "age-career",
      "career": {
        "values": [
          "undergraduate student",
          "大学生"
        ]
      },
      "min_age": 17
    },
    {
      "id": "age-career/masters-student",
      "kind": "age-career",
      "career": {
        "values": [
          "master's student",
          "硕士研究生"
        ]
      },
      "min_age": 21
    },
    {
      "id": "age-career/phd-student",
      "kind": "age-career",
      "career": {
        "values": [
          "PhD student",
          "博士研究生"
        ]
      },
      "min_age": 22
    },
    {
      "id": "age-career/retiree",
      "kind": "age-career",
      "career": {
        "values": [
          "retiree",
          "退休人员"
        ]
      },
      "min_age": 50
    },
    {
      "id": "age-career/homemaker",
      "kind": "age-career",
      "career": {
        "values": [
          "homemaker",
          "家庭主妇/主夫"
        ]
      },
      "min_age": 18
    },
    {
      "id": "age-career/job-seeker",
      "kind": "age-career",
      "career": {
        "values": [
          "job seeker",
          "求职者"
        ]
      },
      "min_age": 16
    },
    {
      "id": "age-career/between-jobs",
      "kind": "age-career",
      "career": {
        "values": [
          "between jobs",
          "待业人员"
        ]
      },
      "min_age": 18
    },
    {
      "id": "age-career/stay-at-home-child",
      "kind": "age-career",
      "career": {
        "values": [
          "stay-at-home child",
          "在家儿童"
        ]
      },
      "max_age": 15
    },
    {
      "id": "age-career/sick-leave",
      "kind": "age-career",
      "career": {
        "values": [
          "person on long-term sick leave",
          "长期病休人员"
        ]
      },
      "min_age": 18
    },
    {
      "id": "career-education/doctorate-required",
      "kind": "career-education",
      "career": {
        "values": [
          "surgeon",
          "外科医生",
          "university professor",
          "大学教授"
        ]
      },
      "min_education": "doctorate"
    },
    {
      "id": "career-education/master-required",
      "kind": "career-education",
      "career": {
        "values": [
          "physician",
          "内科医生",
          "dentist",
          "牙医",
          "research scientist",
          "科研人员"
        ]
      },
      "min_education": "master"
    },
    {
      "id": "career-education/bachelor-required",
      "kind": "career-education",
      "career": {
        "values": [
          "lawyer",
          "律师",
          "judge",
          "法官",
          "architect",
          "建筑师",
          "civil engineer",
          "土木工程师",
          "pharmacist",
          "药剂师",
          "veterinarian",
          "兽医",
          "actuary",
          "精算师",
          "diplomat",
          "外交官",
          "secondary school teacher",
          "中学教师",
          "school principal",
          "校长",
          "auditor",
          "审计师"
        ]
      },
      "min_education": "bachelor"
    },
    {
      "id": "career-education/primary-pupil",
      "kind": "career-education",
      "career": {
        "values": [
          "primary school pupil",
          "小学生"
        ]
      },
      "max_education": "primary school"
    },
    {
      "id": "career-education/middle-school-student",
      "kind": "career-education",
      "career": {
        "values": [
          "middle school student",
          "初中生"
        ]
      },
      "max_education": "secondary school"
    },
    {
      "id": "career-education/high-school-student",
      "kind": "career-education",
      "career": {
        "values": [
          "high school student",
          "高中生"
        ]
      },
      "max_education": "secondary school"
    },
    {
      "id": "career-education/vocational-student",
      "kind": "career-education",
      "career": {
        "values": [
          "vocational school student",
          "职校学生"
        ]
      },
      "max_education": "vocational"
    },
    {
      "id": "career-education/undergraduate",
      "kind": "career-education",
      "career": {
        "values": [
          "undergraduate student",
          "大学生"
        ]
      },
      "min_education": "secondary school",
      "max_education": "bachelor"
    },
    {
      "id": "career-education/masters-student",
      "kind": "career-education",
      "career": {
        "values": [
          "master's student",
          "硕士研究生"
        ]
      },
      "min_education": "bachelor",
      "max_education": "master"
    },
    {
      "id": "career-education/phd-student",
      "kind": "career-education",
      "career": {
        "values": [
          "PhD student",
          "博士研究生"
        ]
      },
      "min_education": "master",
      "max_education": "doctorate"
    },
    {
      "id": "career-education/stay-at-home-child",
      "kind": "career-education",
      "career": {
        "values": [
          "stay-at-home child",
          "在家儿童"
        ]
      },
      "max_education": "primary school"
    }
  ]
}
)json";

}  // namespace

const RuleSet& default_rules() {
  static const RuleSet rules =
      parse_rules(Json::parse(kDefaultRules), "<built-in rules>");
  return rules;
}

}  // namespace bases
