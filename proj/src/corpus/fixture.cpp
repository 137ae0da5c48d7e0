#include "lordd/corpus/fixture.hpp"

#include <array>
#include <string>
#include <string_view>

#include "lordd/error.hpp"
#include "lordd/rng.hpp"

namespace lordd::corpus {

namespace {

struct Entry {
    std::string_view word;
    std::string_view clue;
    std::string_view second_clue;
};

// Target words with two clues each. The first 78 are partitioned into the
// pools below; the rest only show up in valid/test splits.
constexpr std::array<Entry, 96> kLexicon{{
    // US duplicated pool [0, 20)
    {"Money", "We go to our jobs to earn this.", "You keep it in a wallet."},
    {"Planet", "The Earth is one of these.", "Mars and Venus are also this."},
    {"Doctor", "You visit this person when you are sick.", "They work in a hospital."},
    {"Teacher", "This person works in a school with students.", "They give you homework."},
    {"Bicycle", "It has two wheels and pedals.", "You ride it to exercise."},
    {"Umbrella", "You open it when it rains.", "It keeps you dry outside."},
    {"Kitchen", "The room where you cook food.", "The stove and sink are there."},
    {"Library", "A building full of books you can borrow.", "Be quiet in there."},
    {"Airport", "Planes take off and land at this place.", "You go through security there."},
    {"Candle", "It has a wick and you light it.", "It melts as it burns."},
    {"Pillow", "You rest your head on it in bed.", "It is soft and has a case."},
    {"Mirror", "You see your reflection in it.", "It hangs in the bathroom."},
    {"Garden", "Flowers and vegetables grow here.", "You water the plants in it."},
    {"Lemon", "A sour yellow fruit.", "You squeeze it into tea."},
    {"Guitar", "An instrument with six strings.", "You strum it to play songs."},
    {"Island", "Land with water all around it.", "People go there on boats."},
    {"Rocket", "It flies up into space.", "Astronauts ride in it."},
    {"Castle", "A king lives in this big stone building.", "It has towers and walls."},
    {"Bridge", "You cross a river on this.", "Cars drive over it."},
    {"Ladder", "You climb it to reach high places.", "It has rungs."},
    // US singleton pool [20, 42)
    {"Fisherman", "Who will catch the fish from the water?", "They go out in a boat with nets."},
    {"Washing machine", "A thing most of us use daily to clean our clothes.", "You put soap and clothes in it."},
    {"Elephant", "A huge grey animal with a trunk.", "It has big ears and tusks."},
    {"Train", "It runs on tracks and carries people.", "It stops at stations."},
    {"Pencil", "You write with it and can erase it.", "It has lead inside."},
    {"Camera", "You take photos with this.", "It has a lens and a flash."},
    {"Butter", "Yellow spread you put on bread.", "It is made from cream."},
    {"Volcano", "A mountain that erupts with lava.", "Hot rock comes out of the top."},
    {"Rainbow", "Colors in the sky after rain.", "It has seven colors."},
    {"Dentist", "This person checks your teeth.", "They tell you to floss."},
    {"Blanket", "You cover yourself with it when cold.", "It goes on the bed."},
    {"Football", "A game where players kick a ball into a goal.", "There are eleven players on a side."},
    {"Mango", "A sweet tropical fruit with a big seed.", "It is orange inside."},
    {"Hammer", "A tool to hit nails.", "Carpenters use it."},
    {"Passport", "You need it to travel to other countries.", "It has your photo and stamps."},
    {"Bakery", "A shop that sells bread and cakes.", "They bake early in the morning."},
    {"Penguin", "A black and white bird that cannot fly.", "It lives where it is icy."},
    {"Tomato", "A red fruit used in salads and sauce.", "Ketchup is made from it."},
    {"Clock", "It tells you the time.", "It has hands and numbers."},
    {"Wallet", "You keep cash and cards in it.", "It goes in your pocket."},
    {"Scissors", "You cut paper with them.", "They have two blades."},
    {"Tiger", "A big cat with orange and black stripes.", "It lives in the jungle."},
    // IN duplicated pool [42, 51)
    {"Cricket", "A game with bat, ball and wickets.", "Players hit sixes in it."},
    {"Auto rickshaw", "Three wheeled vehicle we take to market.", "The driver uses a meter."},
    {"Temple", "Place where we go to pray to god.", "We ring the bell there."},
    {"Monsoon", "The season when heavy rains come.", "Farmers wait for it."},
    {"Chapati", "Round flat bread we eat with curry.", "It is made from wheat flour."},
    {"Saree", "Long cloth the ladies wear.", "It is draped around the body."},
    {"Coconut", "Hard brown shell with water inside.", "It grows on a tall tree."},
    {"Peacock", "The bird with colorful feathers that dances.", "It is our national bird."},
    {"Festival", "Celebration with lights and sweets.", "Everybody visits relatives."},
    // IN-only singletons [51, 53)
    {"Tea stall", "Roadside shop where we drink chai.", "People stand and talk there."},
    {"Scooter", "Two wheeler vehicle with a small engine.", "You kick start it."},
    // NG-only singletons [53, 78)
    {"Jollof rice", "Party food, red rice cooked in tomato.", "Everybody argues whose own is best."},
    {"Okada", "Motorcycle you take as taxi.", "The rider carries one passenger."},
    {"Generator", "Machine that gives light when power goes.", "It uses fuel and makes noise."},
    {"Plantain", "Looks like banana but you fry it.", "It becomes dodo."},
    {"Market", "Place where traders sell things.", "You price things there."},
    {"Lawyer", "Person that defends you in court.", "They wear wig and gown."},
    {"Church", "Where people go on Sunday to worship.", "The pastor preaches there."},
    {"Radio", "You listen to news on it.", "It has stations."},
    {"Yam", "Tuber we pound for food.", "We eat it with egg sauce."},
    {"Pepper", "It makes the soup hot.", "It is red and small."},
    {"Lizard", "Small animal that nods its head on the wall.", "It has a long tail."},
    {"Farmer", "Person that plants crops.", "They go to farm with hoe."},
    {"Tailor", "Person that sews clothes.", "They take your measurement."},
    {"Bus stop", "Where you wait for the bus.", "Conductors shout there."},
    {"Sunglasses", "You wear them when sun is too much.", "They are dark."},
    {"Soldier", "Person in the army.", "They wear uniform and carry gun."},
    {"Pastor", "Person that leads the church.", "He preaches on Sunday."},
    {"Chalk", "Teacher writes on the board with it.", "It is white."},
    {"Ring", "You wear it on your finger when you marry.", "It can be gold."},
    {"Bucket", "You fetch water with it.", "It has handle."},
    {"Sponge", "You use it to wash plates.", "It soaks water."},
    {"Kettle", "You boil water in it.", "It whistles."},
    {"Hospital", "Place where sick people are treated.", "Nurses work there."},
    {"Torchlight", "You use it to see in the dark.", "It takes battery."},
    {"Drum", "You beat it at parties.", "It makes loud sound."},
    // shared extras [78, 96)
    {"Zebra", "An animal with black and white stripes.", "It looks like a horse."},
    {"Violin", "A string instrument you play with a bow.", "You hold it under your chin."},
    {"Sandwich", "Two slices of bread with filling.", "You pack it for lunch."},
    {"Anchor", "It keeps a ship in place.", "It is heavy and made of iron."},
    {"Helmet", "You wear it on your head for safety.", "Riders must wear it."},
    {"Compass", "It points north.", "Hikers use it with a map."},
    {"Telescope", "You look at stars with it.", "It makes far things look close."},
    {"Backpack", "A bag you carry on your shoulders.", "Students take it to school."},
    {"Snowman", "You build it from snow in winter.", "It has a carrot nose."},
    {"Pyramid", "An ancient tomb in Egypt.", "It has a triangle shape."},
    {"Dolphin", "A smart sea animal that jumps.", "It clicks and whistles."},
    {"Carpet", "It covers the floor of a room.", "You vacuum it."},
    {"Toothbrush", "You clean your teeth with it.", "You use it with paste."},
    {"Keyboard", "You type on it.", "It has keys with letters."},
    {"Parrot", "A bird that can copy what you say.", "It is often green."},
    {"Chimney", "Smoke goes out of the house through it.", "Santa comes down it."},
    {"Lighthouse", "A tower with a light for ships.", "It stands by the sea."},
    {"Pumpkin", "A big orange vegetable.", "People carve it in October."},
}};

constexpr std::size_t kUsDup = 0;
constexpr std::size_t kUsSingle = 20;
constexpr std::size_t kInDup = 42;
constexpr std::size_t kInOnly = 51;
constexpr std::size_t kNgOnly = 53;
constexpr std::size_t kExtras = 78;

struct Style {
    std::array<std::string_view, 3> openers;
    std::array<std::string_view, 3> nudges;
    std::array<std::string_view, 3> answer_forms;  // {} = target word
};

Style style_for(Dialect d) {
    switch (d) {
        case Dialect::en_US:
            return {{"Okay so.", "Um. Alright.", "Good job. Okay."},
                    {"No, not quite.", "Close. Think more.", "Nope."},
                    {"{}.", "Is it {}?", "Oh, {}!"}};
        case Dialect::en_IN:
            return {{"Uh.", "See, this one is easy only.", "Okay, next one, no?"},
                    {"No no, not that.", "Near, near. Think.", "Not that only."},
                    {"{}.", "{} it will be?", "Oh {}!"}};
        case Dialect::en_NG:
            return {{"Ehen.", "Oya, next one.", "This one is easy, abi?"},
                    {"No, not that one.", "You are close o.", "Try again."},
                    {"{}.", "Na {}?", "Ah, {}!"}};
        case Dialect::IN_MV:
        case Dialect::NG_MV:
            return {{"Okay so itself.", "Um. Alright it is.", "Good job. Okay na."},
                    {"No, not quite only.", "Close. You are thinking more.", "Nope, no?"},
                    {"{}.", "Is it {}?", "Oh, {}!"}};
        case Dialect::IN_TR:
            return {{"Next word.", "Here is the next one.", "Okay."},
                    {"No.", "Close.", "Not that."},
                    {"{}.", "Is it {}?", "{}!"}};
    }
    throw ArgumentError("unknown dialect");
}

std::string fill(std::string_view form, std::string_view word) {
    std::string out(form);
    const std::size_t pos = out.find("{}");
    out.replace(pos, 2, word);
    return out;
}

Conversation make_conversation(Dialect d, Split split, std::size_t serial, std::size_t word_idx, Rng& rng) {
    const Entry& e = kLexicon[word_idx];
    const Style st = style_for(d);
    Conversation c;
    c.id = std::string(to_string(d)) + "-" + std::string(to_string(split)) + "-" +
           std::string(4 - std::min<std::size_t>(4, std::to_string(serial).size()), '0') + std::to_string(serial);
    c.dialect = d;
    c.split = split;
    c.target_word = std::string(e.word);

    const std::string_view opener = st.openers[rng.below(st.openers.size())];
    c.turns.push_back({Speaker::describer, std::string(opener) + " " + std::string(e.clue)});
    if (rng.below(2) == 1) {
        std::size_t wrong = word_idx;
        while (wrong == word_idx || contains_target(kLexicon[wrong].word, e.word)) {
            wrong = rng.below(kLexicon.size());
        }
        c.turns.push_back({Speaker::guesser, std::string(kLexicon[wrong].word) + "?"});
        c.turns.push_back({Speaker::describer, std::string(st.nudges[rng.below(st.nudges.size())]) + " " +
                                                   std::string(e.second_clue)});
    }
    std::string_view form = st.answer_forms[rng.below(st.answer_forms.size())];
    std::string shown(e.word);
    if (rng.below(2) == 1) shown = std::string(1, static_cast<char>(std::tolower(shown[0]))) + shown.substr(1);
    c.turns.push_back({Speaker::guesser, fill(form, shown)});
    if (rng.below(3) == 0) c.turns.push_back({Speaker::describer, "Yes."});
    validate(c);
    return c;
}

// Train-split target indices per subset, laid out so cross-subset positive
// counts come out exact: US||IN 11, US||NG 13, US||MV 97, IN||TR 42.
std::vector<std::size_t> train_targets(Dialect d) {
    std::vector<std::size_t> out;
    auto repeat = [&](std::size_t first, std::size_t count, std::size_t times) {
        for (std::size_t i = first; i < first + count; ++i) {
            for (std::size_t t = 0; t < times; ++t) out.push_back(i);
        }
    };
    switch (d) {
        case Dialect::en_US:
            repeat(kUsDup, 20, 2);
            repeat(kUsSingle, 22, 1);
            break;
        case Dialect::en_IN:
            repeat(kInDup, 9, 2);
            repeat(kUsSingle, 11, 1);
            repeat(kInOnly, 2, 1);
            break;
        case Dialect::en_NG:
            repeat(kUsSingle, 13, 1);
            repeat(kNgOnly, 25, 1);
            break;
        case Dialect::IN_MV:
        case Dialect::NG_MV:
            repeat(kUsDup, 20, 2);
            repeat(kUsSingle, 17, 1);
            break;
        case Dialect::IN_TR:
            repeat(kInDup, 8, 2);
            repeat(kInDup + 8, 1, 1);
            repeat(kUsSingle, 8, 1);
            break;
    }
    return out;
}

}  // namespace

SplitCounts fixture_split_counts(Dialect d) {
    switch (d) {
        case Dialect::en_US: return {62, 41, 311};
        case Dialect::en_IN: return {31, 21, 160};
        case Dialect::en_NG: return {38, 25, 194};
        case Dialect::IN_MV: return {57, 39, 296};
        case Dialect::NG_MV: return {57, 39, 296};
        case Dialect::IN_TR: return {25, 17, 132};
    }
    return {};
}

std::vector<Conversation> generate_fixture(std::uint64_t seed) {
    static_assert(kExtras < kLexicon.size());
    Rng rng(seed);
    std::vector<Conversation> out;
    for (Dialect d : kAllDialects) {
        const SplitCounts counts = fixture_split_counts(d);
        std::vector<std::size_t> targets = train_targets(d);
        if (targets.size() != counts.train) throw Error("fixture layout mismatch for " + std::string(to_string(d)));
        rng.shuffle(targets);
        std::size_t serial = 0;
        for (std::size_t w : targets) out.push_back(make_conversation(d, Split::train, serial++, w, rng));
        for (std::size_t i = 0; i < counts.valid; ++i) {
            out.push_back(make_conversation(d, Split::valid, serial++, rng.below(kLexicon.size()), rng));
        }
        for (std::size_t i = 0; i < counts.test; ++i) {
            out.push_back(make_conversation(d, Split::test, serial++, rng.below(kLexicon.size()), rng));
        }
    }
    return out;
}

}  // namespace lordd::corpus
