#!/usr/bin/env python3
"""Regenerates the bundled demo assets under data/.

Everything is derived from fixed seeds, so rerunning the script reproduces
the committed files byte for byte.
"""

import json
import math
import random
from pathlib import Path

ROOT = Path(__file__).resolve().parent


def write_json(rel, obj):
    path = ROOT / rel
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, indent=2, ensure_ascii=False) + "\n")


def write_jsonl(rel, rows):
    path = ROOT / rel
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w") as f:
        for r in rows:
            f.write(json.dumps(r, ensure_ascii=False, sort_keys=True) + "\n")


def write_text(rel, text):
    path = ROOT / rel
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


# ---------------------------------------------------------------- personas

OCCUPATIONS = [
    "marine biologist", "primary school teacher", "night-shift nurse", "freelance illustrator",
    "software tester", "bakery owner", "retired postal worker", "civil engineer", "museum curator",
    "long-haul truck driver", "graduate student in linguistics", "veterinary technician",
    "public librarian", "carpenter", "pharmacist", "sports journalist", "air traffic controller",
    "community organiser", "hotel receptionist", "data analyst", "wildlife photographer",
    "high-school chemistry teacher", "paramedic", "urban gardener", "translator", "firefighter",
    "recording engineer", "insurance underwriter", "physiotherapist", "game store clerk",
]
PLACES = [
    "Halifax", "Osaka", "Lagos", "Porto", "Denver", "Bangalore", "Glasgow", "Monterrey",
    "Auckland", "Krakow", "Nairobi", "Tucson", "Lyon", "Busan", "Cape Town", "Tallinn",
    "Winnipeg", "Valparaiso", "Hanoi", "Reykjavik",
]
HOBBIES = [
    "restores vintage radios", "runs a weekly tabletop campaign", "climbs indoor bouldering walls",
    "keeps a balcony herb garden", "collects old maps", "speedruns retro platformers",
    "volunteers at an animal shelter", "writes short mystery stories", "plays in a brass band",
    "builds model railways", "practises calligraphy", "cycles long distances on weekends",
    "organises neighbourhood trivia nights", "paints miniature figurines", "bakes sourdough",
    "birdwatches at dawn", "studies astronomy with a backyard telescope", "trains for half marathons",
    "learns traditional folk dances", "repairs bicycles for friends",
]
GOALS = [
    "hopes to publish a field guide", "wants to open a small community cafe",
    "is saving up to travel across South America", "dreams of designing a board game",
    "aims to finish a master's degree part-time", "wants to learn a third language",
    "plans to mentor younger colleagues", "hopes to run a marathon under four hours",
    "wants to restore an old family cabin", "is working towards a pilot's licence",
]
TEMPERS = [
    "Friends describe them as patient and dry-humoured.",
    "They are competitive and like to keep score.",
    "They get restless without something new to figure out.",
    "They are warm, chatty and quick to make friends.",
    "They prefer planning carefully before acting.",
    "They enjoy a good argument and rarely back down.",
    "They are quiet at first but fiercely loyal.",
    "They are curious about how things work under the hood.",
]


def personas(n, seed):
    rng = random.Random(seed)
    out = []
    for i in range(n):
        age = rng.randint(19, 71)
        text = (
            f"A {age}-year-old {rng.choice(OCCUPATIONS)} from {rng.choice(PLACES)} who "
            f"{rng.choice(HOBBIES)} and {rng.choice(GOALS)}. {rng.choice(TEMPERS)}"
        )
        out.append({"profile_id": f"ps-{i + 1:04d}", "persona_text": text})
    return out


POOL_DESCRIPTORS = [
    ("US Census Sampler", "general", "unbounded", "objective", "structured", "real-world",
     "Profiles sampled from the joint distribution of age, gender and race/ethnicity in US census data"),
    ("PersonaHub", "general", "unbounded", "mix", "descriptive", "synthesized",
     "Web-derived heterogeneous personas covering job, hobby, belief and goal"),
    ("Tianyi-Personas", "general", "unbounded", "mix", "structured", "synthesized",
     "Synthesized personas with census demographic grounding"),
    ("Persona-Chat", "general", 1115, "subjective", "descriptive", "real-world",
     "Crowdsourced four-sentence self-descriptions with chats"),
    ("Low-vision", "accessibility", 40, "objective", "structured", "real-world",
     "Vision perception profiles of participants with impaired vision"),
    ("Student", "education", 243, "objective", "structured", "expert-derived",
     "Expert-defined traits of students in educational settings"),
    ("talkpl", "music", 33000, "objective", "structured", "real-world",
     "Music listener preferences and habits"),
    ("Eeyore", "mental health", 2589, "mix", "structured", "expert-derived",
     "Depression-related traits extracted from conversations"),
    ("Djinni", "profession", 230000, "objective", "descriptive", "real-world",
     "Job-seeker profiles from a recruitment platform"),
    ("Resume", "profession", 590000, "objective", "structured", "real-world",
     "Resume-style profiles of job seekers"),
]


def gen_pools():
    rows = personas(2900, 20240917)
    write_jsonl("pools/persona_sample.jsonl", rows)
    pools = [{
        "name": "persona-sample", "domain": "general", "size": len(rows), "attribute_kind": "mix",
        "format": "descriptive", "source": "synthesized",
        "citation": "Synthetic personas generated by data/generate.py for the bundled demo",
        "file": "persona_sample.jsonl",
    }]
    for name, domain, size, attr, fmt, src, cite in POOL_DESCRIPTORS:
        pools.append({"name": name, "domain": domain, "size": size, "attribute_kind": attr,
                      "format": fmt, "source": src, "citation": cite})
    write_json("pools/manifest.json", {"pools": pools})


# ---------------------------------------------------------------- surveys

BARTLE_ORDER = ["Achiever", "Explorer", "Killer", "Socializer"]
BARTLE_ITEMS = [
    ("b1", "You enter a new online game world. What do you do first?",
     ["Start on the first quest line to level up quickly", "Wander off to see what lies past the map edge",
      "Look for another player to challenge", "Find a busy town square and start chatting"]),
    ("b2", "Which reward pleases you most?",
     ["A rare title showing you finished everything", "Discovering a hidden area few have seen",
      "Winning a close duel against a skilled rival", "A message from a friend thanking you for help"]),
    ("b3", "Your guild plans an evening session. You would rather...",
     ["Farm the materials needed for your next upgrade", "Test how an obscure game mechanic really works",
      "Raid a rival guild's territory", "Hang out and plan the next group event"]),
    ("b4", "What annoys you most in a game?",
     ["Progress that does not show on your character", "Invisible walls and areas you cannot reach",
      "Opponents who refuse to fight", "Players who never talk to anyone"]),
    ("b5", "A patch adds new content. You first check...",
     ["The new achievements and gear tiers", "The new zones and lore entries",
      "The balance changes to combat", "What your friends think about it"]),
    ("b6", "Which in-game role appeals to you?",
     ["Top of the leaderboard", "Cartographer of unexplored lands", "Feared duelist", "Guild leader and host"]),
    ("b7", "How do you feel about strangers in a game?",
     ["Useful if they help me reach a goal", "Good sources of tips about secrets",
      "Potential opponents", "Potential friends"]),
    ("b8", "The best part of a game session is...",
     ["Ticking off another milestone", "Learning something new about the world",
      "Outplaying someone", "Sharing stories with other players"]),
]

BFI10 = [
    ("bfi1", "I see myself as someone who is reserved.", "extraversion", "-"),
    ("bfi2", "I see myself as someone who is generally trusting.", "agreeableness", "+"),
    ("bfi3", "I see myself as someone who tends to be lazy.", "conscientiousness", "-"),
    ("bfi4", "I see myself as someone who is relaxed, handles stress well.", "neuroticism", "-"),
    ("bfi5", "I see myself as someone who has few artistic interests.", "openness", "-"),
    ("bfi6", "I see myself as someone who is outgoing, sociable.", "extraversion", "+"),
    ("bfi7", "I see myself as someone who tends to find fault with others.", "agreeableness", "-"),
    ("bfi8", "I see myself as someone who does a thorough job.", "conscientiousness", "+"),
    ("bfi9", "I see myself as someone who gets nervous easily.", "neuroticism", "+"),
    ("bfi10", "I see myself as someone who has an active imagination.", "openness", "+"),
]


def gen_surveys():
    items, cats = [], {}
    for item_id, q, opts in BARTLE_ITEMS:
        items.append({"item_id": item_id, "question": q, "kind": "single_choice", "options": opts})
        cats[item_id] = {opt: BARTLE_ORDER[k] for k, opt in enumerate(opts)}
    write_json("surveys/bartle.json", {
        "survey_id": "bartle-short",
        "_note": "Eight-item forced-choice reconstruction of a Bartle player-type test; one option per type.",
        "items": items,
        "scoring": {"kind": "category_majority", "categories": cats, "order": BARTLE_ORDER},
    })
    write_json("surveys/big_five.json", {
        "survey_id": "bfi-10",
        "_note": "Ten-item Big Five inventory, two items per trait, one reverse keyed.",
        "items": [{"item_id": i, "question": q, "kind": "likert_1_5"} for i, q, _, _ in BFI10],
        "scoring": {"kind": "dimension_mean",
                    "dimensions": {i: {"dimension": d, "polarity": p} for i, _, d, p in BFI10}},
    })
    write_json("surveys/post_game.json", {
        "survey_id": "post-game",
        "items": [
            {"item_id": "pg1", "question": "The characters I met felt believable.", "kind": "likert_1_5"},
            {"item_id": "pg2", "question": "I always knew what I was supposed to do next.", "kind": "likert_1_5"},
            {"item_id": "pg3", "question": "I would play another session like this.", "kind": "likert_1_5"},
        ],
        "scoring": {"kind": "none"},
    })


def gen_quotas():
    def cells(per):
        out = {}
        for b in BARTLE_ORDER:
            for o in ("high", "low"):
                for n in ("high", "low"):
                    out[f"bartle={b},openness={o},neuroticism={n}"] = per
        return out

    write_json("quotas/balanced_240.json", {"mode": "balance_first", "cells": cells(15)})
    write_json("quotas/demo_32.json", {"mode": "balance_first", "cells": cells(2)})
    write_json("quotas/none.json", {"mode": "balance_first", "cells": cells(0)})


# ---------------------------------------------------------------- NPCs

NPCS = [
    {
        "npc_id": "zelda", "name": "Zelda", "game": "The Legend of Zelda: Breath of the Wild",
        "target_players": "Explorers",
        "environment": "Hyrule, a hundred years after a great calamity. Ancient shrines built by the Sheikah "
                       "dot the land. The current scene is the overgrown courtyard of a dormant shrine near "
                       "the Great Plateau, where Zelda is studying a stone pedestal that will not respond.",
        "character": "You are Zelda, princess of Hyrule and a devoted scholar of Sheikah technology. You are "
                     "earnest, curious and a little impatient with your own failures. You speak with warmth "
                     "and precision and love explaining how ancient devices work.",
        "goal": "Enlist the traveler's help to wake the dormant shrine and share what you know about its "
                "mechanism without simply handing over the answer.",
        "actions": ["D-INIT", "D-END", "Q-OFFER", "Q-COMPLETE", "E-OBSERVE", "E-INTERACT", "E-EXPLORE",
                    "S-LEARN", "S-OFFER"],
        "player": {"role": "A wandering adventurer who has just climbed onto the Great Plateau.",
                   "goal": "Find out why the shrine is dormant and help Zelda activate it."},
    },
    {
        "npc_id": "kass", "name": "Kass", "game": "The Legend of Zelda: Breath of the Wild",
        "target_players": "Explorers",
        "environment": "Hyrule, on a windswept ledge above Rito Village. A shrine is sealed somewhere in the "
                       "surrounding peaks, and an old verse is said to reveal how to open it.",
        "character": "You are Kass, a Rito bard who carries an accordion everywhere. You speak in a gentle, "
                     "musical way and share old songs passed down by your teacher. You enjoy riddles and "
                     "encourage travelers to work them out themselves.",
        "goal": "Share your teacher's unfinished verse and guide the traveler towards solving the shrine's "
                "riddle.",
        "actions": ["D-INIT", "D-END", "Q-OFFER", "Q-COMPLETE", "E-OBSERVE", "E-EXPLORE", "S-BUILD",
                    "S-LEARN", "S-OFFER"],
        "player": {"role": "A traveler drawn to the ledge by the sound of an accordion.",
                   "goal": "Learn Kass's verse and use it to find and open the hidden shrine."},
    },
    {
        "npc_id": "emily", "name": "Emily", "game": "Stardew Valley", "target_players": "Socializers",
        "environment": "Pelican Town in late spring. The Flower Dance is a week away and the Stardrop Saloon "
                       "is busy. Emily is sketching outfit designs at a corner table.",
        "character": "You are Emily, a cheerful seamstress who works evenings at the saloon. You love gems, "
                     "bright colours and talk of dreams and spirits. You are kind, open and a little quirky.",
        "goal": "Get to know the new farmer and ask for help gathering cloth and an amethyst for your "
                "festival outfits.",
        "actions": ["D-INIT", "D-END", "Q-OFFER", "Q-COMPLETE", "E-GATHER", "E-INTERACT", "S-BUILD",
                    "S-BREAK", "S-OFFER", "S-LEARN"],
        "player": {"role": "The new farmer who recently moved into the old farm outside town.",
                   "goal": "Become friends with Emily and help her get ready for the Flower Dance."},
    },
    {
        "npc_id": "harvey", "name": "Harvey", "game": "Stardew Valley", "target_players": "Socializers",
        "environment": "Pelican Town clinic on a rainy afternoon. It is check-up season, and Harvey is worried "
                       "that a supply delivery has not arrived.",
        "character": "You are Harvey, the town doctor. You are polite, careful and a bit anxious, with a "
                     "quiet passion for aviation and old radio sets. You open up slowly to people you trust.",
        "goal": "Ask the farmer for help tracking down the missing medical supplies and, if they are "
                "friendly, share a little about your interests.",
        "actions": ["D-INIT", "D-END", "Q-OFFER", "Q-COMPLETE", "E-GATHER", "E-INTERACT", "S-BUILD",
                    "S-LEARN", "S-OFFER"],
        "player": {"role": "The new farmer, stopping by the clinic for a check-up.",
                   "goal": "Help Harvey recover his supplies and build a friendship with him."},
    },
    {
        "npc_id": "alexander", "name": "Alexander", "game": "Elden Ring", "target_players": "Achievers",
        "environment": "The Lands Between, in the Limgrave countryside. A large warrior jar is stuck upside "
                       "down in a hole beside the road, and a festival of combat is about to be announced.",
        "character": "You are Iron Fist Alexander, a warrior jar filled with the remains of fallen fighters. "
                     "You are jovial, honourable and boastful about your strength, and you laugh heartily "
                     "even when in trouble.",
        "goal": "Get the Tarnished to free you from the hole, then invite them to join you at the festival "
                "of combat.",
        "actions": ["D-INIT", "D-END", "Q-OFFER", "Q-COMPLETE", "C-ATTACK", "C-DEFEND", "C-USE",
                    "E-INTERACT", "S-BUILD"],
        "player": {"role": "A Tarnished warrior travelling through Limgrave.",
                   "goal": "Free Alexander and earn his respect as a fellow warrior."},
    },
    {
        "npc_id": "ranni", "name": "Ranni the Witch", "game": "Elden Ring", "target_players": "Achievers",
        "environment": "The Lands Between, at the top of a cold tower overlooking a lake of liurnia mist. "
                       "Ranni waits alone by a dim fire, planning a secret undertaking.",
        "character": "You are Ranni the Witch, a Carian princess who has cast aside her flesh. You are "
                     "aloof, formal and guarded, but loyal to those who prove themselves.",
        "goal": "Test whether the Tarnished is worthy to serve you and, if so, reveal the first step of your "
                "plan.",
        "actions": ["D-INIT", "D-END", "Q-OFFER", "Q-COMPLETE", "S-BUILD", "S-LEARN", "S-BREAK",
                    "E-OBSERVE", "C-DEFEND"],
        "player": {"role": "A Tarnished who climbed the tower at the invitation of a mysterious spirit.",
                   "goal": "Earn Ranni's trust and learn what she plans."},
    },
    {
        "npc_id": "zhu_bajie", "name": "Zhu Bajie", "game": "Black Myth: Wukong", "target_players": "Killers",
        "environment": "A mountain pass in a mythic China overrun by yaoguai. Smoke rises from a ruined "
                       "temple where a tiger yaoguai has made its den.",
        "character": "You are Zhu Bajie, the pig-faced former marshal of heaven. You are greedy, lazy and "
                     "funny, but surprisingly fierce with your rake when cornered.",
        "goal": "Talk the Destined One into clearing the temple with you, while grumbling about the danger "
                "and haggling over the spoils.",
        "actions": ["D-INIT", "D-END", "Q-OFFER", "Q-COMPLETE", "C-ATTACK", "C-DEFEND", "C-DODGE",
                    "C-USE", "S-BUILD"],
        "player": {"role": "The Destined One, a staff-wielding monkey warrior.",
                   "goal": "Team up with Zhu Bajie to defeat the tiger yaoguai in the temple."},
    },
    {
        "npc_id": "sun_wukong", "name": "Sun Wukong", "game": "Black Myth: Wukong", "target_players": "Killers",
        "environment": "A cloud-covered peak at the edge of the world. An echo of the Great Sage waits to "
                       "test whoever claims his legacy.",
        "character": "You are an echo of Sun Wukong, the Monkey King. You are proud, mocking and playful, "
                     "and you respect nothing but skill and resolve.",
        "goal": "Challenge the Destined One to prove their worth in a duel, and teach them something if "
                "they fight well.",
        "actions": ["D-INIT", "D-END", "Q-OFFER", "Q-COMPLETE", "C-ATTACK", "C-DEFEND", "C-DODGE",
                    "C-USE", "S-LEARN"],
        "player": {"role": "The Destined One, seeking the relics of the Great Sage.",
                   "goal": "Win the Great Sage's duel and earn his teaching."},
    },
]


def gen_npcs():
    for npc in NPCS:
        doc = dict(npc)
        doc["player"] = dict(npc["player"])
        doc["player"]["environment"] = npc["environment"]
        write_json(f"npcs/{npc['npc_id']}.json", doc)


# ---------------------------------------------------------------- interview

INTERVIEW = [
    ("Language Authenticity",
     "How natural or human-like did the NPCs sound? Did their way of speaking match their character and "
     "setting? Were there any moments where the dialogue broke immersion or felt off?"),
    ("Grounding & Flow",
     "Did the NPCs respond in a way that felt appropriate to your earlier inputs? Did they stay on topic, "
     "remember the context, or demonstrate an understanding of how the conversation was progressing?"),
    ("Conversational Goal Design",
     "Did it feel like there was a clear conversational purpose in each interaction—something you were "
     "meant to accomplish or figure out? Was it easy to recognize and follow through? Did the NPCs support "
     "or guide you toward it?"),
    ("Free-form Interaction & Expanded Actions",
     "Did the dialogue allow you to explore ideas or actions outside the usual game constraints? Did that "
     "flexibility feel empowering or did it create confusion?"),
    ("Usability & System Breakdowns",
     "Did you encounter any moments where the interaction broke down—like irrelevant replies, "
     "repetition, or unclear options? How did you respond or adapt when that happened?"),
    ("LLM vs. Traditional NPCs",
     "Compared to traditional NPCs in similar games, how did these LLM-driven NPCs feel? Were they more "
     "responsive, autonomous, or flexible? Or did they fall short in some ways?"),
    ("Memorable Moments (Good and Bad)",
     "Was there a specific moment that stood out to you—something that felt especially immersive, "
     "awkward, surprising, or frustrating?"),
    ("Personal Fit Based on Player Type",
     "Given that your player type is ${player_type}, your Big Five profile reflects ${big_five}, and your "
     "real-world persona is ${persona}, do you feel the NPCs delivered the kind of experience you typically "
     "enjoy in games? Or would you have preferred something different?"),
]


def gen_interview():
    write_json("interview/default.json", {
        "script_id": "npc-experience",
        "aspects": [{"name": n, "prompt": p} for n, p in INTERVIEW],
    })


# ---------------------------------------------------------------- mock bank

def alts(*texts):
    return "\n---\n".join(t.strip("\n") for t in texts) + "\n"


def gen_mock():
    m = "mock/"
    write_text(m + "likert.txt", alts(
        "[5]", "[4]", "[4] I mostly agree.", "[3]", "[5] Definitely.", "[2]", "[4]",
        "[3] Somewhat.", "I would say four, mostly.", "[1]", "[5]"))
    write_text(m + "choice.txt", alts(
        "[1]", "[1] That sounds most like me.", "[1]",
        "[2]", "[2] Definitely this one.", "[2]",
        "[3]", "[3] No contest.",
        "[4]", "[4] That is the fun part for me.", "[4]", "[4]"))
    write_text(m + "reask_likert.txt", alts("[3]"))
    write_text(m + "reask_choice.txt", alts("[1]"))
    write_text(m + "player_turn.txt", alts(
        "[Think-Aloud] I want a feel for this character before committing to anything. A friendly opening "
        "seems safest.\n[D-INIT] Hello there! I'm new around here. What's going on?",
        "[Think-Aloud] There's a clear task on offer and taking it moves me toward my goal.\n"
        "[Q-ACCEPT] (the task just offered) [D-ACCEPT] Count me in. Where do I start?",
        "[Think-Aloud] Before acting I should look around. Details here might matter later.\n"
        "[E-OBSERVE] (the surroundings and anything unusual) [D-OBSERVE] I take a careful look around.",
        "[Think-Aloud] The conversation keeps circling the same point, so I'll ask about something new.\n"
        "[S-LEARN] (more about their story) [D-LEARN] Tell me more about how you ended up here.",
        "[Think-Aloud] Exploring could open up the next step.\n"
        "[E-EXPLORE] (the path ahead) [D-EXPLORE] I'll scout ahead and report back.",
        "[Think-Aloud] Building some trust seems worthwhile here.\n"
        "[S-BUILD] (the character in front of me) [D-BUILD] I'm glad we met. I'd like to help however I can.",
        "[Think-Aloud] I think I've done what I came for and the task looks complete.\n"
        "[Q-COMPLETE] (the task) [D-COMPLETE] That should do it.\n[D-END] Thanks for everything. Until next time!",
        "I nod and wait to see what happens next.",
        "[Think-Aloud] Fighting might be the quickest way through this.\n"
        "[C-ATTACK] (the nearest threat) [D-ATTACK] Stand back, I'll handle this!",
        "[Think-Aloud] Gathering supplies now could save time later.\n"
        "[E-GATHER] (useful materials nearby) [D-GATHER] I'll collect what we need.",
        "[Think-Aloud] Everything I needed is settled. Time to wrap up.\n[D-END] I should get going. Take care!",
    ))
    write_text(m + "retry.txt", alts(
        "[Think-Aloud] My last reply did not follow the format. I'll keep it simple.\n"
        "[D-INIT] Sorry, let me try that again. What would you like me to do?",
        "[Think-Aloud] I should answer properly this time.\n[D-INIT] Let's continue where we left off."))
    npc_lines = {
        "zelda": [
            "[D-INIT] Oh! A traveler. Forgive me, I was absorbed in this pedestal. It should respond to a "
            "Sheikah Slate, yet it stays dark.",
            "[Q-OFFER] (Find what is blocking the shrine's power conduit) [D-OFFER] The conduit runs beneath "
            "the courtyard. Would you help me trace it?",
            "[D-INIT] Look at these markings. They repeat every third stone, which suggests a sequence.",
            "[Q-COMPLETE] (The shrine hums back to life) [D-COMPLETE] It's awake! You have a keen eye."],
        "kass": [
            "[D-INIT] Ah, a fellow wanderer! Will you listen to a verse my teacher left unfinished?",
            "[Q-OFFER] (Solve the riddle of the twin peaks) [D-OFFER] Where the peaks stand as twins, a shrine "
            "sleeps between them. Will you seek it?",
            "[D-INIT] The song says the answer lies where the wind falls silent. Curious, isn't it?",
            "[Q-COMPLETE] (The hidden shrine is revealed) [D-COMPLETE] Splendid! My teacher would be proud."],
        "emily": [
            "[D-INIT] Hi there! Aren't the colours outside gorgeous today? I've been sketching all morning.",
            "[Q-OFFER] (Bring a bolt of cloth and an amethyst) [D-OFFER] I'm short on materials for the "
            "Flower Dance outfits. Could you help?",
            "[D-INIT] I had the strangest dream about crystals singing. Do you ever dream like that?",
            "[Q-COMPLETE] (The outfits are finished) [D-COMPLETE] They're perfect! Thank you so much!"],
        "harvey": [
            "[D-INIT] Oh, hello. Please, have a seat. Is this for your check-up?",
            "[Q-OFFER] (Find the missing supply crate) [D-OFFER] A delivery never arrived. Would you mind "
            "asking at the general store?",
            "[D-INIT] Sorry, I'm a little distracted. The radio said a storm is coming.",
            "[Q-COMPLETE] (The supplies are recovered) [D-COMPLETE] That's a huge relief. Thank you."],
        "alexander": [
            "[D-INIT] Ho there! Might I trouble you? I'm in a bit of a pickle. Stuck fast, you see!",
            "[Q-OFFER] (Knock Alexander free of the hole) [D-OFFER] Give me a good whack from behind, would "
            "you? Don't hold back!",
            "[D-INIT] Ha ha! A warrior jar never gives up. Now, have you heard of the festival?",
            "[Q-COMPLETE] (Alexander is free) [D-COMPLETE] Freedom! You have my thanks, friend!"],
        "ranni": [
            "[D-INIT] So you have come. State your purpose, Tarnished.",
            "[Q-OFFER] (Swear to serve Ranni) [D-OFFER] I seek one who will follow my path without question. "
            "Are you such a one?",
            "[D-INIT] Do not mistake my silence for patience.",
            "[Q-COMPLETE] (The oath is sworn) [D-COMPLETE] Very well. Thou art my servant now."],
        "zhu_bajie": [
            "[D-INIT] Hey, monkey! Don't look at me like that. I'm only here for the food.",
            "[Q-OFFER] (Clear the tiger yaoguai from the temple) [D-OFFER] That tiger's sitting on a feast. "
            "You go in first, I'll guard the rear.",
            "[D-INIT] Ugh, my feet hurt. How much further is this temple?",
            "[Q-COMPLETE] (The tiger is defeated) [D-COMPLETE] Ha! Told you we'd win. Half the spoils are mine."],
        "sun_wukong": [
            "[D-INIT] Another one claiming my legacy? Show me what you've got.",
            "[Q-OFFER] (Survive three exchanges with the Great Sage) [D-OFFER] Last three rounds and I might "
            "teach you something.",
            "[D-INIT] Too slow! Again!",
            "[Q-COMPLETE] (The duel is over) [D-COMPLETE] Not bad. Not bad at all."],
    }
    for npc, lines in npc_lines.items():
        write_text(m + f"npc_{npc}.txt", alts(*lines))
    write_text(m + "npc_turn.txt", alts("[D-INIT] I see. Go on."))
    write_text(m + "interview.txt", alts(
        "Mostly natural. The characters sounded like themselves, though a few replies repeated the same "
        "phrasing, which pulled me out of it.",
        "They followed what I said reasonably well and remembered the task. Sometimes they ignored my "
        "actions and went back to small talk.",
        "The goals were clear once a quest was offered. Before that I was not sure what I was meant to do.",
        "I liked being able to try anything. At times there were so many options that I was unsure which "
        "would matter.",
        "A couple of replies felt off topic or repeated themselves. I adapted by asking more direct questions.",
        "More flexible than scripted characters, and they reacted to unusual choices. They were also wordier "
        "than I would like.",
        "Completing the quest felt good. The repetitive lines near the end were the low point.",
        "For my play style it worked fairly well. I would have liked a bit more to discover on my own."))
    routes = [
        {"key": "retry", "contains": "could not be used", "in": "last_user"},
        {"key": "reask_likert", "contains": ["could not be read", "[3]"], "in": "last_user"},
        {"key": "reask_choice", "contains": ["could not be read", "[1]"], "in": "last_user"},
        {"key": "interview", "contains": "being interviewed", "in": "system"},
        {"key": "likert", "contains": "Answer on a scale", "in": "last_user"},
        {"key": "choice", "contains": "Options:", "in": "last_user"},
        {"key": "player_turn", "contains": "## Think-Aloud", "in": "system"},
    ]
    for npc in NPCS:
        routes.append({"key": f"npc_{npc['npc_id']}", "contains": f"You are {npc['name'].split(' the ')[0]}",
                       "in": "system"})
    routes.append({"key": "npc_turn", "contains": "## Actions", "in": "system"})
    write_json(m + "routes.json", routes)


# ---------------------------------------------------------------- analysis fixtures

CODE_LABELS = [
    "Redundant response / repetition", "Immersive experience", "Clear goals", "Smooth system flow",
    "Appropriate response", "Character consistency", "Lore accuracy", "Helpful guidance",
    "Emotional engagement", "Humour landed", "Quest clarity", "Natural language",
    "Context memory", "Unexpected reaction", "Pacing too slow", "Pacing too fast",
    "Ambiguous instructions", "Combat felt abstract", "Wish for visuals", "Wanted more choices",
    "Social bonding", "Curiosity rewarded", "Felt ignored", "Tone mismatch",
    "Hard to end conversation", "Over-explaining", "Player agency", "Surprising depth",
    "Relationship progression", "Reward satisfaction", "Repetitive quest structure", "Unclear stakes",
    "Fair challenge", "Role-play support", "Breaks fourth wall", "Generic replies",
    "Strong personality", "Weak personality", "Exploration hooks", "Item interaction unclear",
    "Confused by the low-fidelity setting", "Lengthy response", "Unnecessary / over freedom",
    "Information overload", "Off topic", "Trust in NPC", "Frustration with loop", "Desire to replay",
]

TABLE2 = [
    ("Redundant response / repetition", 518), ("Immersive experience", 475), ("Clear goals", 389),
    ("Smooth system flow", 376), ("Appropriate response", 307),
    ("Confused by the low-fidelity setting", 2), ("Lengthy response", 2),
    ("Unnecessary / over freedom", 5), ("Information overload", 7), ("Off topic", 8),
]


def code_id(k):
    return f"c{k:02d}"


def hyper_miss(n, r, s):
    if n - r < s:
        return 0.0
    return math.comb(n - r, s) / math.comb(n, s)


def gen_analysis():
    assert len(CODE_LABELS) == 48
    write_jsonl("fixtures/codebook.jsonl",
                [{"code_id": code_id(k + 1), "label": lab, "description": ""} for k, lab in enumerate(CODE_LABELS)])

    rng = random.Random(4242)
    n_agents = 240
    occurrence = {}
    common_l = [code_id(k) for k in range(1, 12)]        # c01..c11, in the local set
    common_c = [code_id(k) for k in range(1, 9)]         # c01..c08, in the crowd set
    rare_l = [code_id(k) for k in range(12, 24)]         # carried by 6 agents each
    human_only_l = [code_id(24), code_id(25)]
    mid_c = [code_id(k) for k in range(26, 41)]          # carried by 15 agents each
    human_only_c = [code_id(41), code_id(42)]
    agent_only = [code_id(k) for k in range(43, 49)]
    for c in common_l:
        occurrence[c] = rng.randint(60, 160)
    for c in rare_l:
        occurrence[c] = 6
    for c in mid_c:
        occurrence[c] = 15
    for c in agent_only:
        occurrence[c] = rng.randint(20, 80)

    agents = [set() for _ in range(n_agents)]
    for c, r in occurrence.items():
        for t in rng.sample(range(n_agents), r):
            agents[t].add(c)
    for t in agents:
        if not t:
            t.add(rng.choice(common_l))

    human_l = common_l + rare_l + human_only_l
    human_c = common_c + mid_c + human_only_c

    def spread(codes, n, prefix, study, alias=None):
        rows = [set() for _ in range(n)]
        for c in codes:
            for t in rng.sample(range(n), rng.randint(1, max(1, n // 3))):
                rows[t].add(c)
        for t in rows:
            if not t:
                t.add(rng.choice(codes))
        out = []
        for i, t in enumerate(rows):
            names = sorted(alias.get(c, c) if alias else c for c in t)
            out.append({"id": f"{prefix}-{i + 1:02d}", "study": study, "codes": names})
        return out

    synonyms = {"repeats-itself": "c01", "goal-clarity": "c03"}
    inverse = {v: k for k, v in synonyms.items()}
    rows = [{"id": f"agent-{i + 1:03d}", "study": "agentic", "codes": sorted(t)} for i, t in enumerate(agents)]
    rows += spread(human_l, 10, "local", "local", alias=inverse)
    rows += spread(human_c, 20, "crowd", "crowdsourced")
    write_jsonl("fixtures/coded_transcripts.jsonl", rows)
    write_json("fixtures/synonyms.json", synonyms)

    def expected(human, s):
        tot = 0.0
        for h in human:
            r = sum(1 for t in agents if h in t)
            tot += 1.0 - hyper_miss(n_agents, r, s)
        return tot / len(human)

    for name, human in (("local", human_l), ("crowd", human_c)):
        print(name, " ".join(f"{s}:{expected(human, s):.4f}" for s in (1, 2, 4, 8, 16, 32, 64, 128, 240)))

    # Code frequency fixture: occurrence counts spread over agent transcripts.
    label_to_id = {lab: code_id(k + 1) for k, lab in enumerate(CODE_LABELS)}
    per = [dict() for _ in range(n_agents)]
    for label, count in TABLE2:
        cid = label_to_id[label]
        for _ in range(count):
            t = rng.randrange(n_agents)
            per[t][cid] = per[t].get(cid, 0) + 1
    write_jsonl("fixtures/code_frequency.jsonl",
                [{"id": f"agent-{i + 1:03d}", "study": "agentic", "codes": p} for i, p in enumerate(per) if p])

    write_json("fixtures/cost_time_ledger.json", {"rows": [
        {"team": "Agentic", "size": 240, "interactions_per_player": 8, "recruit_min": 240, "interact_min": 1380,
         "post_min": 120, "time_per_player": 6.9, "cost_per_player": 0.28, "cost_per_insight": 6.03,
         "note": "API-call"},
        {"team": "Crowdsourced", "size": 20, "interactions_per_player": 1, "recruit_min": 402, "interact_min": 600,
         "post_min": 315, "time_per_player": 65, "cost_per_player": 20.50, "cost_per_insight": 31.53,
         "note": "compensation"},
        {"team": "Local", "size": 10, "interactions_per_player": 1, "recruit_min": 498, "interact_min": 300,
         "post_min": 150, "time_per_player": 95, "cost_per_player": 40.00, "cost_per_insight": 33.33,
         "note": "compensation"},
        {"team": "LLM-as-generic-user", "size": 1, "interactions_per_player": 8, "recruit_min": 0,
         "interact_min": 5.4, "post_min": 0.5, "time_per_player": 5.9, "cost_per_player": 0.14,
         "cost_per_insight": 0.028, "note": "Minimal API-call"},
    ]})

    studies = ["agentic", "local", "crowdsourced", "generic"]
    items = [f"{block}:{s}" for block in ("time", "cost", "fidelity", "helpfulness") for s in studies]
    write_json("fixtures/expert_ratings.json", {
        "_note": "Expert ratings transcribed per rater. The first block carries no dimension label in the "
                 "source table and is presumed to be time efficiency.",
        "raters": ["expert-1", "expert-2", "expert-3"],
        "items": items,
        "ratings": [
            [5, 1, 2, 5, 5, 1, 3, 5, 3.42, 4.06, 4.06, 2.24, 3.53, 3.71, 2.82, 0.43],
            [5, 1, 2, 5, 4, 2, 3, 5, 2.94, 4.20, 3.70, 1.62, 3.88, 3.22, 3.55, 2.36],
            [5, 1, 2, 5, 4, 2, 2, 5, 2.58, 4.09, 3.84, 1.82, 4.00, 5.00, 4.68, 3.10],
        ],
    })

    # Synthetic expert packets exercising the fidelity and helpfulness path.
    prng = random.Random(99)
    insight_pool = [f"i{k:02d}" for k in range(1, 31)]
    for e in range(1, 4):
        local = set(prng.sample(insight_pool, 12))
        crowd = set(prng.sample(insight_pool, 14))
        agentic = set(prng.sample(sorted(local | crowd), 10)) | set(prng.sample(insight_pool, 4))
        generic = set(prng.sample(insight_pool, 5))
        blocks = {}
        ratings = {"agentic": (5, 5), "local": (1, 1 + (e > 1)), "crowdsourced": (2, 3 - (e == 3)),
                   "generic": (5, 5)}
        for s, ins in (("agentic", agentic), ("local", local), ("crowdsourced", crowd), ("generic", generic)):
            blocks[s] = {
                "behavior_matches": [prng.randint(3, 10) for _ in range(3)],
                "insights": sorted(ins),
                "time_rating": ratings[s][0],
                "cost_rating": ratings[s][1],
            }
        ranked = []
        for k in range(10):
            sources = [s for s in studies if prng.random() < (0.7 if s != "generic" else 0.3)]
            ranked.append({"insight": f"ranked insight {k + 1}", "sources": sources})
        write_json(f"fixtures/expert_{e}.json", {
            "expert": f"expert-{e}",
            "_note": "Synthetic packet; the per-expert inputs behind the published ratings are not available.",
            "studies": blocks, "ranked": ranked})


def main():
    gen_pools()
    gen_surveys()
    gen_quotas()
    gen_npcs()
    gen_interview()
    gen_mock()
    gen_analysis()


if __name__ == "__main__":
    main()
